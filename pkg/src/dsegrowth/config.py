"""Validation of JSON run configurations.

A configuration may carry any of three sections; each command uses the ones it
needs.

* theory: ``residues``, ``s``, ``mellin``, ``truncation`` (and optionally
  ``convention``).  ``s`` may be a bare integer for a single residue ``r``.
  Each Mellin entry is either a list of ``"p/q"`` Laurent coefficients
  ``f_{-1}, f_0, ...`` or ``{"scale": c, "poles": [p1, ...]}`` meaning
  ``c / (rho * prod(p_i - rho))``.
* ``p_series``: per residue either a list of p(k) values or
  ``{"form": "lipatov", "c": c}`` / ``{"form": "inverse_factorial"}``.
* ``ode``: parameters for the vector-field commands.

All problems are collected and reported together, each prefixed with the JSON
path at which it occurred.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .ode import OdeSpec
from .radius import PrimitiveForm
from .recursions import PrimitiveSeries
from .series import LaurentData, PoleAtOrigin, laurent_from_poles, to_fraction
from .solver import CONVENTIONS, TheorySpec

DATA_DIR = Path(__file__).parent / "data"


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class RunInput:
    theory: TheorySpec | None = None
    p_series: PrimitiveSeries | None = None
    p_forms: dict[str, PrimitiveForm] = field(default_factory=dict)
    s: dict[str, int] = field(default_factory=dict)
    truncation: int | None = None
    radius_truncation: int | None = None
    ode: OdeSpec | None = None
    ode_extra: dict[str, Any] = field(default_factory=dict)
    hopf: dict[str, Any] = field(default_factory=dict)
    raw: dict[str, Any] = field(default_factory=dict)


def _frac(value, path: str, errors: list[str]) -> Fraction | None:
    try:
        if isinstance(value, float):
            # floats are accepted via their decimal representation
            return Fraction(repr(value))
        return to_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        errors.append(f"{path}: cannot parse {value!r} as a rational (use \"p/q\")")
        return None


def _float(value, path: str, errors: list[str]) -> float | None:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        f = _frac(value, path, errors)
        return None if f is None else float(f)
    errors.append(f"{path}: expected a number, got {value!r}")
    return None


def _int(value, path: str, errors: list[str]) -> int | None:
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append(f"{path}: expected an integer, got {value!r}")
        return None
    return value


def _check_s(value, path: str, errors: list[str]) -> int | None:
    s = _int(value, path, errors)
    if s == 0:
        errors.append(f"{path}: s = 0 is the linear case, which is strictly simpler and not "
                      "handled here; s must be a nonzero integer")
        return None
    return s


def _laurent(entry, path: str, N: int | None, errors: list[str]) -> LaurentData | None:
    if isinstance(entry, dict):
        unknown = set(entry) - {"scale", "poles"}
        if unknown:
            errors.append(f"{path}: unknown keys {sorted(unknown)}")
        if "poles" not in entry:
            errors.append(f"{path}: pole form needs 'poles'")
            return None
        scale = _frac(entry.get("scale", 1), f"{path}.scale", errors)
        poles = [_frac(p, f"{path}.poles[{i}]", errors) for i, p in enumerate(entry["poles"])]
        if scale is None or any(p is None for p in poles) or N is None:
            return None
        try:
            return laurent_from_poles(scale, poles, N)
        except PoleAtOrigin as exc:
            errors.append(f"{path}: {exc}")
            return None
    if not isinstance(entry, list) or not entry:
        errors.append(f"{path}: expected a non-empty list of Laurent coefficients or a pole form")
        return None
    vals = [_frac(v, f"{path}[{i}]", errors) for i, v in enumerate(entry)]
    if any(v is None for v in vals):
        return None
    data = LaurentData(vals)
    if N is not None and data.order < N:
        errors.append(f"{path}: Laurent data reaches f_{data.order} but truncation {N} needs "
                      f"f_{N} (order must be >= truncation)")
        return None
    return data


def _p_entry(entry, path: str, N: int | None, errors: list[str]):
    if isinstance(entry, dict):
        form = entry.get("form")
        if form not in ("lipatov", "inverse_factorial"):
            errors.append(f"{path}.form: expected 'lipatov' or 'inverse_factorial', got {form!r}")
            return None, None
        c = None
        if form == "lipatov":
            c = _float(entry.get("c"), f"{path}.c", errors)
            if c is not None and c <= 0:
                errors.append(f"{path}.c: must be positive")
                return None, None
        pf = PrimitiveForm(form, c)
        return (pf.values(N) if N else None), pf
    if not isinstance(entry, list) or not entry:
        errors.append(f"{path}: expected a non-empty list or a form object")
        return None, None
    vals = [_frac(v, f"{path}[{i}]", errors) for i, v in enumerate(entry)]
    if any(v is None for v in vals):
        return None, None
    return vals, PrimitiveForm("finite")


def validate_config(doc: dict[str, Any]) -> RunInput:
    errors: list[str] = []
    if not isinstance(doc, dict):
        raise ConfigError(["$: configuration must be a JSON object"])
    out = RunInput(raw=doc)

    known = {"residues", "s", "mellin", "truncation", "convention", "p_series", "ode", "hopf",
             "radius", "description", "note", "non_authoritative"}
    for key in sorted(set(doc) - known):
        errors.append(f"$.{key}: unknown key")

    N = None
    if "truncation" in doc:
        N = _int(doc["truncation"], "$.truncation", errors)
        if N is not None and N < 1:
            errors.append("$.truncation: must be >= 1")
            N = None
    out.truncation = N

    # residues and s
    s_map: dict[str, int] = {}
    if "s" in doc:
        if isinstance(doc["s"], dict):
            for r, v in doc["s"].items():
                sv = _check_s(v, f"$.s.{r}", errors)
                if sv is not None:
                    s_map[str(r)] = sv
        else:
            sv = _check_s(doc["s"], "$.s", errors)
            if sv is not None:
                s_map["r"] = sv
    residues = doc.get("residues")
    if residues is None:
        residues = list(s_map) if s_map else ["r"]
    elif not isinstance(residues, list) or not residues or not all(isinstance(r, str) for r in residues):
        errors.append("$.residues: expected a non-empty list of names")
        residues = list(s_map)
    for r in residues:
        if "s" in doc and r not in s_map and not any(e.startswith(f"$.s.{r}") or e.startswith("$.s:")
                                                     for e in errors):
            errors.append(f"$.s.{r}: missing exponent for residue {r!r}")
    out.s = s_map

    convention = doc.get("convention", "rg")
    if convention not in CONVENTIONS:
        errors.append(f"$.convention: expected one of {list(CONVENTIONS)}, got {convention!r}")

    # Mellin data
    if "mellin" in doc:
        mel = doc["mellin"]
        if N is None and "truncation" not in doc:
            errors.append("$.truncation: required with mellin data")
        if not isinstance(mel, dict):
            errors.append("$.mellin: expected an object keyed by residue")
        else:
            if len(residues) == 1 and set(mel) and not set(mel) <= set(residues):
                # allow {"1": [...]} directly for a single residue
                mel = {residues[0]: mel}
            prims: dict[str, dict[int, list[LaurentData]]] = {}
            for r, per_k in mel.items():
                if r not in residues:
                    errors.append(f"$.mellin.{r}: unknown residue")
                    continue
                if not isinstance(per_k, dict):
                    errors.append(f"$.mellin.{r}: expected an object keyed by loop order")
                    continue
                prims[r] = {}
                for k, items in per_k.items():
                    try:
                        kk = int(k)
                    except ValueError:
                        errors.append(f"$.mellin.{r}.{k}: loop order must be an integer")
                        continue
                    if kk < 1:
                        errors.append(f"$.mellin.{r}.{k}: loop order must be >= 1")
                        continue
                    if not isinstance(items, list):
                        errors.append(f"$.mellin.{r}.{k}: expected a list of primitives")
                        continue
                    if items and not isinstance(items[0], (list, dict)):
                        items = [items]
                    datas = [_laurent(e, f"$.mellin.{r}.{k}[{i}]", N, errors) for i, e in enumerate(items)]
                    prims[r][kk] = [d for d in datas if d is not None]
            if not errors and N is not None:
                out.theory = TheorySpec(tuple(residues), {r: s_map[r] for r in residues}, prims, N,
                                        convention)

    # direct primitives
    if "p_series" in doc:
        ps = doc["p_series"]
        if isinstance(ps, (list, dict)) and not (isinstance(ps, dict) and "form" in ps):
            per_res = ps if isinstance(ps, dict) else {residues[0]: ps}
        else:
            per_res = {residues[0]: ps}
        rad = doc.get("radius", {})
        if rad and not isinstance(rad, dict):
            errors.append("$.radius: expected an object")
            rad = {}
        rN = rad.get("truncation") if isinstance(rad, dict) else None
        if rN is not None:
            rN = _int(rN, "$.radius.truncation", errors)
        out.radius_truncation = rN
        gen_N = max(x for x in (N, rN, 1) if x is not None)
        vals: dict[str, list] = {}
        for r, entry in per_res.items():
            if r not in residues:
                errors.append(f"$.p_series.{r}: unknown residue")
                continue
            v, form = _p_entry(entry, f"$.p_series.{r}", gen_N, errors)
            if v is not None:
                vals[r] = v
                out.p_forms[r] = form
        if not errors:
            out.p_series = PrimitiveSeries(tuple(vals), vals)
    elif "radius" in doc and isinstance(doc["radius"], dict) and "truncation" in doc["radius"]:
        out.radius_truncation = _int(doc["radius"]["truncation"], "$.radius.truncation", errors)

    if "ode" in doc:
        out.ode, out.ode_extra = _ode(doc["ode"], errors)
    if "hopf" in doc:
        if not isinstance(doc["hopf"], dict):
            errors.append("$.hopf: expected an object")
        else:
            out.hopf = dict(doc["hopf"])

    if "mellin" not in doc and "p_series" not in doc and "ode" not in doc and "hopf" not in doc:
        errors.append("$: configuration needs at least one of 'mellin', 'p_series', 'ode' or 'hopf'")
    if ("mellin" in doc or "p_series" in doc) and "s" not in doc:
        errors.append("$.s: required with mellin or p_series data")
    if errors:
        raise ConfigError(errors)
    return out


def _range(value, path: str, errors: list[str]) -> tuple[float, float] | None:
    if not isinstance(value, list) or len(value) != 2:
        errors.append(f"{path}: expected [low, high]")
        return None
    a, b = _float(value[0], f"{path}[0]", errors), _float(value[1], f"{path}[1]", errors)
    if a is None or b is None:
        return None
    if not a < b:
        errors.append(f"{path}: low must be < high")
        return None
    return a, b


def _ode(doc, errors: list[str]) -> tuple[OdeSpec | None, dict[str, Any]]:
    if not isinstance(doc, dict):
        errors.append("$.ode: expected an object")
        return None, {}
    mode = doc.get("mode", "single")
    if mode not in ("single", "system2"):
        errors.append(f"$.ode.mode: expected 'single' or 'system2', got {mode!r}")
        return None, {}
    kw: dict[str, Any] = {"mode": mode}
    if "m" in doc:
        kw["m"] = _float(doc["m"], "$.ode.m", errors)
    if "s" in doc:
        kw["s"] = _check_s(doc["s"], "$.ode.s", errors)
    if "P" in doc:
        if not isinstance(doc["P"], list):
            errors.append("$.ode.P: expected a coefficient list (index = power of x)")
        else:
            kw["P"] = [_float(v, f"$.ode.P[{i}]", errors) for i, v in enumerate(doc["P"])]
    if "s_pair" in doc:
        sp = doc["s_pair"]
        if not isinstance(sp, list) or len(sp) != 2:
            errors.append("$.ode.s_pair: expected two integers")
        else:
            kw["s_pair"] = tuple(_check_s(v, f"$.ode.s_pair[{i}]", errors) for i, v in enumerate(sp))
    if "P_pair" in doc:
        pp = doc["P_pair"]
        if not isinstance(pp, list) or len(pp) != 2 or not all(isinstance(p, list) for p in pp):
            errors.append("$.ode.P_pair: expected two coefficient lists")
        else:
            kw["P_pair"] = tuple([_float(v, f"$.ode.P_pair[{j}][{i}]", errors) for i, v in enumerate(p)]
                                 for j, p in enumerate(pp))
    for key in ("xrange", "yrange"):
        if key in doc:
            kw[key] = _range(doc[key], f"$.ode.{key}", errors)
    extra = {}
    for key in ("x0", "x_probe", "x_end", "root_interval", "trajectories"):
        if key in doc:
            extra[key] = doc[key]
    known = {"mode", "m", "s", "P", "s_pair", "P_pair", "xrange", "yrange"} | set(extra)
    for key in sorted(set(doc) - known):
        errors.append(f"$.ode.{key}: unknown key")
    if any(v is None for v in kw.values()) or any(
            isinstance(v, (list, tuple)) and any(x is None for x in v) for v in kw.values()):
        return None, extra
    try:
        return OdeSpec(**kw), extra
    except ValueError as exc:
        errors.append(f"$.ode: {exc}")
        return None, extra


def load_config(path: str | Path) -> RunInput:
    """Read and validate a configuration; bundled names resolve to the data directory."""
    p = Path(path)
    if not p.exists():
        bundled = DATA_DIR / p.name
        if bundled.exists():
            p = bundled
        else:
            raise ConfigError([f"$: cannot read {path}"])
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError([f"$: invalid JSON ({exc})"]) from None
    return validate_config(doc)


def bundled_configs() -> list[str]:
    return sorted(p.name for p in DATA_DIR.glob("*.json"))

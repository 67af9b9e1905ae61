"""Batch command line: load a triple document, run one suite, emit a JSON report."""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import jsonschema
import numpy as np

from . import breaking, fluct, gauge, models
from .algebra import AlgebraElement, random_unitary
from .opcore import DEFAULT_TOL, Op, Tolerance
from .schemas import REPORT_SCHEMA, REPORT_SCHEMA_ID
from .triple import Twist, TwistedTriple, extract_signs, verify_axioms

__all__ = ["COMMANDS", "RunConfig", "InputError", "run", "render", "main"]

COMMANDS = ("check", "fluctuate", "gauge", "break", "search")
DEFAULT_SEED = 0

EXIT_OK, EXIT_VIOLATIONS, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    """Malformed input; the message carries a line or field location."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Optional[str] = None
    output: Optional[str] = None
    seed: int = DEFAULT_SEED
    rtol: Optional[float] = None
    atol: Optional[float] = None
    pairs: Optional[str] = None
    symmetrize: bool = False
    ansatz: str = "signed-diagonal"
    decomposition: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        for name in ("rtol", "atol"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive")

    @property
    def tolerance(self) -> Tolerance:
        return Tolerance(
            DEFAULT_TOL.atol if self.atol is None else self.atol,
            DEFAULT_TOL.rtol if self.rtol is None else self.rtol,
        )


# -- input -------------------------------------------------------------------------


def _load(cfg: RunConfig) -> TwistedTriple:
    if cfg.input is None:
        raise InputError("--in: an input document is required")
    try:
        text = Path(cfg.input).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"--in: cannot read {cfg.input}: {e.strerror}") from None
    try:
        t = models.loads(text)
    except models.DocumentError as e:
        raise InputError(f"{cfg.input}: {e}") from None
    if cfg.rtol is not None or cfg.atol is not None:
        try:
            t = replace(t, tol=cfg.tolerance)
        except ValueError as e:
            raise InputError(f"{cfg.input}: {e}") from None
    return t


def _element(t: TwistedTriple, x, where: str) -> AlgebraElement:
    try:
        v = np.asarray(x, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{where}: expected a list of {t.alg.dim} real coefficients") from None
    if v.shape != (t.alg.dim,) or not np.all(np.isfinite(v)):
        raise InputError(f"{where}: expected a list of {t.alg.dim} real coefficients")
    return AlgebraElement(v)


def parse_pairs(t: TwistedTriple, spec: Optional[str], seed: int) -> tuple[list, Optional[int]]:
    """``random:N[@K]`` draws N seeded pairs; anything else is a JSON file.

    The file holds ``{"component": K or null, "pairs": [[a, b], ...]}`` (or
    just the list) with a and b given as real coefficient lists. ``K``
    restricts the form to one twist component.
    """
    if spec is None:
        return [], None
    if spec.startswith("random:"):
        body, _, comp = spec[len("random:"):].partition("@")
        try:
            n = int(body)
            component = int(comp) if comp else None
        except ValueError:
            raise InputError(f"--pairs: cannot parse {spec!r}, expected random:N or random:N@K") from None
        if n < 0:
            raise InputError("--pairs: the pair count must be non-negative")
        rng = np.random.default_rng(seed)
        pairs = [(t.alg.random_element(rng), t.alg.random_element(rng)) for _ in range(n)]
    else:
        try:
            doc = json.loads(Path(spec).read_text(encoding="utf-8"))
        except OSError as e:
            raise InputError(f"--pairs: cannot read {spec}: {e.strerror}") from None
        except json.JSONDecodeError as e:
            raise InputError(f"{spec}: line {e.lineno} column {e.colno}: invalid JSON: {e.msg}") from None
        if isinstance(doc, list):
            doc = {"pairs": doc}
        if not isinstance(doc, dict) or not isinstance(doc.get("pairs"), list):
            raise InputError(f"{spec}: pairs: expected a list of [a, b] coefficient pairs")
        component = doc.get("component")
        if component is not None and not isinstance(component, int):
            raise InputError(f"{spec}: component: expected an integer or null")
        pairs = []
        for i, p in enumerate(doc["pairs"]):
            if not isinstance(p, list) or len(p) != 2:
                raise InputError(f"{spec}: pairs/{i}: expected [a, b]")
            pairs.append((_element(t, p[0], f"{spec}: pairs/{i}/0"), _element(t, p[1], f"{spec}: pairs/{i}/1")))
    if component is not None and not 0 <= component < len(t.twists):
        raise InputError(f"--pairs: component {component} out of range for {len(t.twists)} twist(s)")
    return pairs, component


def _decomposition(t: TwistedTriple, name: Optional[str]) -> Optional[list[np.ndarray]]:
    if name is None or name == "document":
        return None
    if t.metadata.get("model") != "toy":
        raise InputError(f"--decomposition: {name!r} is only defined for toy documents; use 'document'")
    try:
        k_x = complex(*t.metadata["k_x"])
        k_y = complex(*t.metadata["k_y"])
        return models.toy_decomposition(models.ToyParams(k_x, k_y), name)
    except (KeyError, TypeError) as e:
        raise InputError(f"metadata: toy parameters missing or malformed ({e})") from None
    except ValueError as e:
        raise InputError(f"--decomposition: {e}") from None


# -- commands ----------------------------------------------------------------------


def _cmd_check(t: TwistedTriple, cfg: RunConfig):
    rep = verify_axioms(t)
    result = {"signs": extract_signs(t).as_dict(), "notices": list(rep.notices)}
    return rep.passed, rep.results, result


def _form(t: TwistedTriple, cfg: RunConfig):
    pairs, component = parse_pairs(t, cfg.pairs, cfg.seed)
    w = fluct.build_one_form(t, pairs, component)
    if cfg.symmetrize:
        w = fluct.symmetrize(t, w)
    return w


def _cmd_fluctuate(t: TwistedTriple, cfg: RunConfig):
    w = _form(t, cfg)
    tw = fluct.fluctuate(t, w)
    rep = verify_axioms(tw)
    result = {
        "pairs": len(w.pairs),
        "form_selfadjoint": w.is_selfadjoint,
        "flags": list(tw.metadata.get("flags", [])),
        "triple": models.serialize(tw),
    }
    return rep.passed, rep.results, result


def _cmd_gauge(t: TwistedTriple, cfg: RunConfig):
    u = random_unitary(t.alg, cfg.seed)
    w = _form(t, cfg)
    fl = fluct.fluctuate(t, w)
    try:
        out = gauge.transform_dirac(fl, u, "formula")
    except gauge.GaugeError as e:
        raise InputError(f"gauge: {e}") from None
    rep = gauge.verify_vw(t, u, w)
    result = {
        "u": [float(x) for x in u.coeffs],
        "covariance_defect": [gauge.covariance_defect(t, u, ell) for ell in range(len(t.twists))],
        "triple": models.serialize(out),
    }
    return rep.passed, rep.results, result


def _cmd_break(t: TwistedTriple, cfg: RunConfig):
    comps = _decomposition(t, cfg.decomposition)
    if comps is not None:
        if len(comps) != len(t.twists):
            raise InputError(
                f"--decomposition: {cfg.decomposition!r} has {len(comps)} components, the document has {len(t.twists)} twist(s)"
            )
        t = t.with_twists([Twist(Op.linear(c), tw.nu) for c, tw in zip(comps, t.twists)])
    rep = breaking.breaking_fixed_point(t, seed=cfg.seed)
    ok = rep.is_subalgebra and rep.residual_max <= t.tol.rtol * max(1.0, float(np.linalg.norm(t.D.mat)))
    return ok, (), rep.as_dict()


def _cmd_search(t: TwistedTriple, cfg: RunConfig):
    try:
        ansatz = breaking.TwistAnsatz(family=cfg.ansatz)
    except ValueError as e:
        raise InputError(f"--ansatz: {e}") from None
    out = breaking.search_twists(t, ansatz, _decomposition(t, cfg.decomposition))
    result = {
        "ansatz": cfg.ansatz,
        "decomposition": cfg.decomposition or "document",
        "candidates_per_component": out["candidates_per_component"],
        "assignments": out["assignments"],
        "notes": out["notes"],
        "results": [r.as_dict() for r in out["results"]],
    }
    return True, (), result


_HANDLERS = {
    "check": _cmd_check,
    "fluctuate": _cmd_fluctuate,
    "gauge": _cmd_gauge,
    "break": _cmd_break,
    "search": _cmd_search,
}


# -- output ------------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(x.real), _jsonable(x.imag)]
    return x


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute one command; raises ``InputError`` for malformed input."""
    t = _load(cfg)
    ok, conditions, result = _HANDLERS[cfg.command](t, cfg)
    report = {
        "schema": REPORT_SCHEMA_ID,
        "command": cfg.command,
        "input": cfg.input,
        "seed": cfg.seed,
        "tolerance": {"atol": t.tol.atol, "rtol": t.tol.rtol},
        "status": "pass" if ok else "violations",
        "conditions": [c.as_dict() for c in conditions],
        "result": result,
    }
    report = _jsonable(report)
    jsonschema.validate(report, REPORT_SCHEMA)
    return (EXIT_OK if ok else EXIT_VIOLATIONS), report


def render(report: dict) -> str:
    return json.dumps(report, indent=1, allow_nan=False) + "\n"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nctwist", description="Verify and analyse twisted finite spectral triples.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--in", dest="input", required=True, metavar="FILE", help="triple document (JSON)")
    p.add_argument("--out", dest="output", metavar="FILE", help="report destination (default stdout)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--pairs", metavar="SPEC", help="random:N[@K] or a JSON file of coefficient pairs")
    p.add_argument("--symmetrize", action="store_true", help="replace the one-form by its self-adjoint part")
    p.add_argument("--ansatz", default="signed-diagonal", choices=[f for f in breaking.FAMILIES if f != "user"])
    p.add_argument("--decomposition", metavar="NAME", help="document, whole, 2twist or 3twist (toy only)")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = RunConfig(**vars(args))
        code, report = run(cfg)
    except InputError as e:
        print(f"nctwist: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as e:
        # remaining validation failures (tolerances, algebra data) are input problems too
        print(f"nctwist: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    text = render(report)
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

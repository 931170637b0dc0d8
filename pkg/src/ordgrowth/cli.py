"""Command-line front end: ``ordgrowth <subcommand> ...``.

Exit codes: 0 success, 2 invalid input, 3 certificate failure.
All output is deterministic JSON (sorted keys) plus optional TSV curves.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from . import cascade, homology
from .entropy_report import _default, entropy_numbers, entropy_profile
from .growth_order import GrowthSequence, compare_sequences
from .systems import BudgetError, construct

EXIT_OK, EXIT_INVALID, EXIT_CERT = 0, 2, 3

log = logging.getLogger("ordgrowth")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_system_args(p):
    p.add_argument("--system", required=True,
                   help="fullshift, rotation, morsesmale, denjoy, twist, torus")
    p.add_argument("--alpha", type=float)
    p.add_argument("--k", type=int, help="alphabet size (fullshift)")
    p.add_argument("--word-len", type=int)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--tail-exponent", type=float)
    p.add_argument("--depth", type=int)
    p.add_argument("--profile", choices=["identity", "square"])
    p.add_argument("--t-range", type=_floats)
    p.add_argument("--matrix", help='torus action, e.g. "1,1;0,1"')
    p.add_argument("--eps", type=_floats, required=True, help="strictly descending, e.g. 0.2,0.1,0.05")
    p.add_argument("--n", type=int, required=True, help="n_max")
    p.add_argument("--delta", type=float, help="sample mesh (default: the system's own rule)")
    p.add_argument("--seed", type=int, default=None, help="recorded only; sampling is deterministic")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ordgrowth", description="Generalized entropy growth curves and cascade certificates.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="entropy profile across scales")
    _add_system_args(p)
    p.add_argument("--out", type=Path, help="directory for profile.json and curve_eps*.tsv")

    p = sub.add_parser("numbers", help="entropy numbers (class on the nonwandering set, class overall)")
    _add_system_args(p)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("cascade-build", help="construct cascade parameters with a certificate")
    p.add_argument("--target", required=True, help="log2, n^(1/4), ... or a TSV curve file")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--verify", action="store_true", help="also run the independent verification")
    p.add_argument("--envelope-tsv", type=Path, help="write envelope vs target up to min(m_K, 10^5)")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("cascade-verify", help="re-check a stored parameter file")
    p.add_argument("params", type=Path)
    p.add_argument("--grid", type=int, default=10_000)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("homology", help="spectral radius, block profile and exponent of a homology action")
    p.add_argument("--matrix", required=True)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("compare", help="order relation between two stored curves (TSV or JSON)")
    p.add_argument("a", type=Path)
    p.add_argument("b", type=Path)
    p.add_argument("--out", type=Path)
    return ap


def write_atomic(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1, default=_default) + "\n"


def _emit(doc, out: Path | None, name: str):
    text = dumps(doc)
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(Path(out) / name if Path(out).suffix == "" else Path(out), text)


def _system(args):
    params = {}
    for key in ("alpha", "k", "word_len", "amplitude", "tail_exponent", "depth", "profile", "t_range"):
        v = getattr(args, key, None)
        if v is not None:
            params[key] = v
    if args.matrix:
        params["A"] = homology.parse_matrix(args.matrix)
    return construct(args.system, **params)


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "verbose") and v is not None
            and not callable(v)}


def _delta_rule(args):
    return (lambda eps: args.delta) if args.delta else None


def cmd_estimate(args) -> int:
    spec = _system(args)
    prof = entropy_profile(spec, args.eps, args.n, _delta_rule(args))
    doc = {"config": _config(args), "profile": prof.to_json()}
    if args.out:
        out = Path(args.out)
        for e, c in zip(prof.epsilons, prof.curves):
            write_atomic(out / f"curve_eps{e:g}.tsv", c.to_tsv({"system": spec.name, "eps": e}))
        write_atomic(out / "profile.json", dumps(doc))
    else:
        sys.stdout.write(dumps(doc))
    log.info("%s", prof.summary())
    return EXIT_OK


def cmd_numbers(args) -> int:
    spec = _system(args)
    nums = entropy_numbers(spec, args.eps, args.n, _delta_rule(args))
    _emit({"config": _config(args), "entropy_numbers": [str(x) for x in nums]}, args.out, "numbers.json")
    return EXIT_OK


def _target(text: str):
    p = Path(text)
    if p.exists():
        return cascade.SequenceTarget(_load_curve(p))
    return cascade.parse_target(text)


def cmd_cascade_build(args) -> int:
    target = _target(args.target)
    try:
        params = cascade.build_cascade(target, args.stages)
    except cascade.CascadeInfeasible as exc:
        _emit({"error": str(exc), "stage": exc.stage, "inequality": exc.inequality,
               "target": str(target), "stages": args.stages}, args.out, "cascade.json")
        return EXIT_CERT
    cert = cascade.verify_bounds(params) if args.verify else params.certificate
    doc = {"params": params.to_json(), "certificate": cert.to_json(), "passed": cert.passed}
    _emit(doc, args.out, "cascade.json")
    if args.envelope_tsv:
        top = min(params.cutpoints[-1], 100_000)
        lines = ["n\tenvelope\ttarget"]
        for n in range(1, top + 1):
            lines.append(f"{n}\t{float(cascade.envelope_eval(params, n))!r}\t{float(target.value(n))!r}")
        write_atomic(args.envelope_tsv, "\n".join(lines) + "\n")
    return EXIT_OK if cert.passed else EXIT_CERT


def cmd_cascade_verify(args) -> int:
    doc = json.loads(Path(args.params).read_text(encoding="utf-8"))
    params = cascade.CascadeParams.from_json(doc.get("params", doc))
    cert = cascade.verify_bounds(params, grid=args.grid, eps=args.eps)
    _emit({"certificate": cert.to_json(), "passed": cert.passed,
           "failures": cert.failures()}, args.out, "verify.json")
    return EXIT_OK if cert.passed else EXIT_CERT


def _jsonable_rational(k: Fraction):
    return int(k) if k.denominator == 1 else str(k)


def cmd_homology(args) -> int:
    h = homology.block_profile(args.matrix)
    seq, degree = homology.power_norm_growth(args.matrix, args.n)
    doc = {**h.to_json(), "power_norm_degree": degree, "horizon": seq.meta["horizon"]}
    doc["k"] = _jsonable_rational(homology.shub_exponent(args.matrix)) if h.unit else None
    _emit(doc, args.out, "homology.json")
    return EXIT_OK


def _load_curve(path: Path) -> GrowthSequence:
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith(("[", "{")):
        return GrowthSequence.from_json(text)
    return GrowthSequence.from_tsv(text)


def cmd_compare(args) -> int:
    rel = compare_sequences(_load_curve(args.a), _load_curve(args.b))
    _emit({"a": str(args.a), "b": str(args.b), "relation": rel.value}, args.out, "compare.json")
    return EXIT_OK


COMMANDS = {
    "estimate": cmd_estimate, "numbers": cmd_numbers, "cascade-build": cmd_cascade_build,
    "cascade-verify": cmd_cascade_verify, "homology": cmd_homology, "compare": cmd_compare,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if hasattr(args, "eps") and isinstance(args.eps, list):
        if len(args.eps) == 0 or any(b >= a for a, b in zip(args.eps, args.eps[1:])):
            print("ordgrowth: error: --eps must be strictly descending", file=sys.stderr)
            return EXIT_INVALID
    try:
        return COMMANDS[args.cmd](args)
    except (ValueError, BudgetError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"ordgrowth: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

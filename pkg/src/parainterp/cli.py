"""Command-line front end.

Exit codes: 0 success, 1 failed verification, 2 invalid input, 3 resource
limit.  Sites are written ``i1, i2, ...`` (1-based) everywhere on the
command line and in output files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
import tomli

from . import __version__, interp, jw, oracle, report
from .errors import ParaInterpError, ValidationError
from .gram import MAX_N, build_gram
from .params import PRESETS, from_config, make_preset, q_from_entries
from .spectral import positivity_scan, rank_scan_anyon, spectrum

CHECKS = ("expansion", "trilinear", "nonclosure", "jw", "phi", "gram")
DEFAULT_TOL = {
    "expansion": 1e-8,
    "trilinear": 1e-10,
    "nonclosure": 1e-12,
    "jw": 1e-10,
    "phi": 1e-10,
    "gram": 1e-10,
}
RUN_KEYS = ("tol", "seed", "threads", "max_n", "format")


# -- argument helpers ------------------------------------------------------------

def parse_indices(text: str) -> tuple[int, ...]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        body = tok[1:] if tok[:1] in "iI" else tok
        if not body.isdigit() or int(body) < 1:
            raise ValidationError(f"bad site index {tok!r}; expected i1, i2, ...")
        out.append(int(body) - 1)
    if not out:
        raise ValidationError("no indices given")
    return tuple(out)


def parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    try:
        if len(parts) == 3:
            lo, hi, cnt = float(parts[0]), float(parts[1]), int(parts[2])
            if cnt < 1:
                raise ValueError
            return np.linspace(lo, hi, cnt)
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise ValidationError(f"bad grid {text!r}; use lo:hi:count or a comma list") from None


def _order(text):
    if text is None:
        return None
    if str(text).lower() in ("inf", "infinite", "oo"):
        return "inf"
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"p must be a positive integer or 'inf', got {text!r}") from None


def _read_toml(path: str) -> dict:
    try:
        return tomli.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    except tomli.TOMLDecodeError as exc:
        raise ValidationError(f"invalid TOML in {path}: {exc}") from None


def apply_config(args: argparse.Namespace) -> None:
    """Fill unset run options from the config file's ``[run]`` table."""
    args.config_data = _read_toml(args.config) if args.config else {}
    run = args.config_data.get("run", {})
    unknown = set(run) - set(RUN_KEYS)
    if unknown:
        raise ValidationError(f"unknown [run] keys {sorted(unknown)}")
    for key in RUN_KEYS:
        if getattr(args, key, None) is None and key in run:
            setattr(args, key, run[key])
    if args.seed is None:
        args.seed = 0
    if args.threads is None:
        args.threads = 1
    if args.max_n is None:
        args.max_n = MAX_N


def build_spec(args: argparse.Namespace, sites: int, *, q=None):
    """Spec from ``--config``/``--qfile``/inline flags, in that order of precedence."""
    if "spec" in getattr(args, "config_data", {}):
        return from_config(args.config_data["spec"])
    p = _order(args.p)
    if args.qfile:
        data = _read_toml(args.qfile)
        data = data.get("spec", data)
        n = int(data.get("sites", sites))
        if "q" not in data:
            raise ValidationError(f"{args.qfile} has no q entries")
        return make_preset("multiparam", q=q_from_entries(n, data["q"]), p=p or 2)
    preset = args.preset or "green"
    qv = args.q if q is None else q
    kw: dict = {"sites": sites}
    if preset == "quon":
        kw.update(q=qv if qv is not None else 0.0)
    elif preset == "para":
        kw.update(epsilon=args.epsilon if args.epsilon is not None else 1, p=p or 2)
    elif preset in ("green", "multiparam"):
        kw.update(q=qv if qv is not None else 0.0, p=p or 2)
    elif preset == "anyon":
        phi = args.phi or 0.0
        kw.update(lam=args.lam if args.lam is not None else 0.0, p=p or 2,
                  phi=np.triu(np.full((sites, sites), phi), 1) - np.tril(np.full((sites, sites), phi), -1))
    elif preset == "speicher":
        kw.update(q=qv if qv is not None else 0.0, p=p or 2,
                  epsilon=args.epsilon if args.epsilon is not None else 1)
    else:
        raise ValidationError(f"unknown preset {preset!r}")
    return make_preset(preset, **kw)


def _sites_for(args, indices=()) -> int:
    return max([2, *(s + 1 for s in indices)] + ([args.sites] if args.sites else []))


def emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise ValidationError(f"cannot write {args.out}: {exc}") from None
    else:
        sys.stdout.write(text)


def _num(x: float) -> str:
    return f"{x:.17g}"


def _cnum(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


# -- commands --------------------------------------------------------------------

def cmd_gram(args) -> int:
    idx = parse_indices(args.indices or "i1,i2")
    spec = build_spec(args, _sites_for(args, idx))
    g = build_gram(spec, idx, max_n=args.max_n)
    emit(args, report.dumps(report.GramReport.from_gram(g), args.format or "csv"))
    return 0


def cmd_vev(args) -> int:
    w = oracle.parse_word(args.word)
    sites = max([2] + [le.site + 1 for le in w.letters] + ([args.sites] if args.sites else []))
    spec = build_spec(args, sites)
    if w.op is oracle.Op.B:
        val = oracle.vev_b_word(spec, w).value
    else:
        val = oracle.vev_a_word(spec, w).value
    emit(args, _cnum(complex(val)) + "\n")
    return 0


def cmd_spectrum(args) -> int:
    idx = parse_indices(args.indices or "i1,i2,i3")
    sites = _sites_for(args, idx)
    grid = parse_grid(args.grid or "-1:1:21")
    scan = positivity_scan(lambda x: build_spec(args, sites, q=x), idx, grid,
                           tol=args.tol, workers=args.threads)
    emit(args, scan.to_csv())
    return 0


def cmd_rank_scan(args) -> int:
    idx = parse_indices(args.indices or "i1,i2")
    sites = _sites_for(args, idx)
    grid = parse_grid(args.grid or "0:1:11")
    phi = args.phi or 0.0
    phim = np.triu(np.full((sites, sites), phi), 1) - np.tril(np.full((sites, sites), phi), -1)
    scan = rank_scan_anyon(grid, phim, _order(args.p) or 2, idx, sites=sites, tol=args.tol,
                           workers=args.threads)
    emit(args, scan.to_csv())
    return 0


def _line(name: str, ok: bool, value: float, extra: str = "") -> str:
    status = "PASS" if ok else "FAIL"
    return f"{name} {status} max_residual={_num(value)}{(' ' + extra) if extra else ''}"


def cmd_verify(args) -> int:
    check = args.check
    tol = args.tol if args.tol is not None else DEFAULT_TOL[check]
    lines: list[str] = []
    ok_all = True

    def record(name, value, extra="", counted=True):
        nonlocal ok_all
        ok = value < tol
        if counted:
            ok_all &= ok
        lines.append(_line(name, ok, value, extra) if counted
                       else f"{name} INFO max_residual={_num(value)}{(' ' + extra) if extra else ''}")

    if check == "expansion":
        spec = build_spec(args, _sites_for(args, (0, 1, 2)))
        rep = interp.extract_second_order(spec, 0, 1, (0, 1, 2), seed=args.seed, threshold=tol)
        record("expansion.fit", rep.residual_norm)
        record("expansion.closed_form", rep.error,
               f"coefficient={_num(rep.extracted.real)} closed_form={_num(rep.closed_form.real)}")
        record("expansion.oracle", rep.oracle_deviation)
        if args.out:
            Path(args.out).write_text(rep.to_text())
    elif check == "trilinear":
        if args.preset is None and args.q is None and args.epsilon is not None:
            args.preset = "para"
        spec = build_spec(args, _sites_for(args))
        res = oracle.trilinear_scan(spec, range(spec.site_count),
                                    max_particles=args.particles or 3)
        record("trilinear", res.max_abs, f"elements={res.elements}")
    elif check == "nonclosure":
        spec = build_spec(args, _sites_for(args))
        res = oracle.nonclosure_scan(spec, range(spec.site_count), max_len=args.particles or 3)
        record("nonclosure", res.max_abs, f"elements={res.elements}")
    elif check == "jw":
        lam = args.lam if args.lam is not None else 0.0
        mu = args.mu if args.mu is not None else 1.0
        sites = args.sites or 2
        p = _order(args.p) or 2
        phi = args.phi or 0.0
        phim = np.triu(np.full((sites, sites), phi), 1) - np.tril(np.full((sites, sites), phi), -1)
        rep = jw.build_rep(sites, p, args.cutoff or 3)
        params = jw.JwParams.from_phi(lam, mu, phim)
        res = jw.algebra_residual(jw.jw_map(rep, params), params, rep)
        for rel in ("R1", "R2", "R3"):
            record(f"jw.{rel}", res.max(rel))
        record("jw.R3_literal", res.max("R3_literal"), counted=False)
        record("jw.green_algebra", res.max("GREEN"), counted=mu == 1.0)
        if args.out:
            Path(args.out).write_text(res.to_csv())
    elif check == "phi":
        idx = parse_indices(args.indices or "i1,i2,i3")
        spec = build_spec(args, _sites_for(args, idx))
        metric = interp.FockMetric(spec)
        worst = 0.0
        for site in sorted(set(idx)):
            tab = interp.phi_table(spec, idx, site, metric=metric)
            worst = max(worst, interp.phi_oracle_deviation(spec, tab, metric))
        record("phi", worst)
    elif check == "gram":
        idx = parse_indices(args.indices or "i1,i2,i3")
        spec = build_spec(args, _sites_for(args, idx))
        g = build_gram(spec, idx, max_n=args.max_n)
        ref = oracle.a_gram_matrix(spec, g.basis.elements)
        record("gram", float(np.max(np.abs(g.entries - ref))),
               f"rank={spectrum(g).rank} dim={g.dim}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0 if ok_all else 1


def cmd_convert(args) -> int:
    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {args.input}: {exc}") from None
    rep = report.loads(text)
    emit(args, report.dumps(rep, args.format or ("toml" if text.lstrip().startswith("#") else "csv")))
    return 0


# -- parser ----------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--q", type=float)
    p.add_argument("--p", help="Green order: positive integer or 'inf'")
    p.add_argument("--epsilon", type=int, choices=(-1, 1))
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--phi", type=float, help="phase phi_ij for every pair i < j")
    p.add_argument("--sites", type=int)
    p.add_argument("--qfile", help="TOML file with q = [[i, j, re, im], ...]")
    p.add_argument("--config", help="TOML file with [spec] and [run] tables")
    p.add_argument("--indices", help="comma list of sites, e.g. i1,i2,i3")
    p.add_argument("--format", choices=report.FORMATS)
    p.add_argument("--out")
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--max-n", dest="max_n", type=int)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parainterp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gram", help="Gram matrix of a base tuple")
    _common(p)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("vev", help="vacuum expectation value of an operator word")
    p.add_argument("word")
    _common(p)
    p.set_defaults(func=cmd_vev)

    p = sub.add_parser("spectrum", help="min eigenvalue and rank along a q grid")
    p.add_argument("--grid")
    _common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("rank-scan", help="anyonic rank scan over lambda")
    p.add_argument("--grid")
    _common(p)
    p.set_defaults(func=cmd_rank_scan)

    p = sub.add_parser("verify", help="run a numerical check")
    p.add_argument("check", choices=CHECKS)
    p.add_argument("--particles", type=int, help="largest state size in oracle scans")
    p.add_argument("--cutoff", type=int, help="boson cutoff for the jw check")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("convert", help="convert a Gram report between CSV and TOML")
    p.add_argument("input")
    _common(p)
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        apply_config(args)
        if args.threads < 1:
            raise ValidationError("--threads must be >= 1")
        return args.func(args)
    except ParaInterpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

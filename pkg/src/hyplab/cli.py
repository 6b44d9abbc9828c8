"""Command-line front end.

Subcommands build families and joins, dump tables, run amenability
classifications, solve Reiter certificates, and emit JSON/CSV reports.
CSV reports also render a PNG figure next to the output file unless
--no-plot is given.  Identical configurations produce byte-identical
JSON/CSV output.

Exit codes: 0 success, 2 config error, 3 structure error (negative
linearization), 4 LP infeasible.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .amenability import classify, reiter_lp
from .core import table_to_json
from .errors import ConfigError, HyplabError, LpInfeasibleError, StructureError
from .families import (FAMILY_BUILDERS, build_table, coefficient_rows,
                       family_from_spec, graph_spectral_points,
                       orthogonality_check, verify_hypergroup)
from .joins import (FiniteTable, join, join_dual_enumerate, transfer_check,
                    verify_join_axioms)
from .twovar import disc_diagonal_probe

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_STRUCTURE = 3
EXIT_LP = 4


# ---------------------------------------------------------------------------
#  Config plumbing: flags > config file > defaults
# ---------------------------------------------------------------------------

def _parse_params(text: str) -> dict:
    """Accept '{"a": 2, "b": 4}' or 'a=2,b=4'."""
    if not text:
        return {}
    text = text.strip()
    if text.startswith("{"):
        return json.loads(text)
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        key, _, val = part.partition("=")
        if not _:
            raise ConfigError(f"bad parameter fragment {part!r}")
        out[key.strip()] = float(val)
    return out


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None


def _effective(args, cfg: dict, key: str, default):
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in cfg:
        return cfg[key]
    return default


def _family_from_args(args, cfg: dict):
    name = _effective(args, cfg, "family", None)
    if name is None:
        raise ConfigError("--family is required")
    params = getattr(args, "params", None)
    params = _parse_params(params) if params else cfg.get("params", {})
    return family_from_spec({"family": name, "params": params})


def _resolve_points(fam, text: str) -> list[float]:
    """Comma list of x values; graph families also accept s0/s1."""
    pts = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok in ("s0", "s1"):
            if fam.name != "graph":
                raise ConfigError(f"{tok} is only defined for the graph family")
            s0, s1 = graph_spectral_points(fam.params["a"], fam.params["b"])
            pts.append(s0 if tok == "s0" else s1)
        else:
            try:
                pts.append(float(tok))
            except ValueError:
                raise ConfigError(f"bad point {tok!r}") from None
    return pts


def _grid(spec: str) -> list[float]:
    try:
        lo, hi, steps = spec.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise ConfigError(f"bad grid spec {spec!r}; expected lo:hi:steps") from None
    if not (lo < hi) or steps < 1:
        raise ConfigError("grid requires lo < hi and steps >= 1")
    return [float(v) for v in np.linspace(lo, hi, steps)]


def _threads() -> int:
    env = os.environ.get("HYPLAB_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _json_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=True)


class _Out:
    """Write-to-file-or-stdout helper; returns the path if any."""

    def __init__(self, path: str | None):
        self.path = path

    def write(self, text: str):
        if self.path:
            Path(self.path).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)

    def sibling_png(self) -> str | None:
        if not self.path:
            return None
        p = Path(self.path)
        return str(p.with_suffix(".png"))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
#  Subcommands
# ---------------------------------------------------------------------------

def cmd_family_info(args, cfg) -> int:
    fam = _family_from_args(args, cfg)
    N = int(_effective(args, cfg, "N", 10))
    rows = coefficient_rows(fam, N)
    out = _Out(args.out)
    if args.format == "json":
        doc = {"family": fam.label(), "xstar": fam.xstar,
               "rows": [{"n": n, "a": a, "b": b, "c": c, "h": h}
                        for (n, a, b, c, h) in rows]}
        out.write(_json_dumps(doc) + "\n")
    else:
        out.write(_csv_text(["n", "a_n", "b_n", "c_n", "h_n"], rows))
        png = out.sibling_png()
        if png and not args.no_plot:
            from .plotting import save_haar_plot
            save_haar_plot(png, [r[0] for r in rows], [r[4] for r in rows],
                           f"Haar weights, {fam.label()}")
    return EXIT_OK


def cmd_dump_table(args, cfg) -> int:
    fam = _family_from_args(args, cfg)
    N = int(_effective(args, cfg, "N", 8))
    table = build_table(fam, N)
    _Out(args.out).write(table_to_json(table, N) + "\n")
    return EXIT_OK


def cmd_verify(args, cfg) -> int:
    fam = _family_from_args(args, cfg)
    N = int(_effective(args, cfg, "N", 32))
    rep = verify_hypergroup(
        fam, N,
        neg_tol=float(_effective(args, cfg, "tol_neg", 1e-12)),
        mass_tol=float(_effective(args, cfg, "tol_mass", 1e-10)),
        coeff_tol=float(_effective(args, cfg, "tol_coeff", 1e-12)))
    _Out(args.out).write(_json_dumps(rep.as_dict()) + "\n")
    return EXIT_OK if rep.passed else EXIT_STRUCTURE


def cmd_classify(args, cfg) -> int:
    fam = _family_from_args(args, cfg)
    N = int(_effective(args, cfg, "N", 256))
    if args.grid:
        xs = _grid(args.grid)
    elif args.points:
        xs = _resolve_points(fam, args.points)
    else:
        raise ConfigError("classify needs --grid or --points")
    table = build_table(fam, max(32, min(N, 512)))
    tail_thresh = float(_effective(args, cfg, "tol_decay_tail", 0.5))
    slope_thresh = float(_effective(args, cfg, "tol_decay_slope", -0.1))

    def run(x: float) -> dict:
        verdict = classify(table, fam.character(x), N,
                           tail_thresh=tail_thresh,
                           slope_thresh=slope_thresh)
        doc = verdict.as_dict()
        doc["x"] = x
        doc["family"] = fam.label()
        return doc

    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            docs = list(pool.map(run, xs))
    else:
        docs = [run(x) for x in xs]
    out = _Out(args.out)
    if args.format == "csv":
        rows = [(d["x"], d["verdict"],
                 d.get("certificate", {}).get("kind", ""),
                 d["diagnostics"].get("point_mass", {}).get("value", ""),
                 d["diagnostics"].get("c0", {}).get("slope", ""))
                for d in docs]
        out.write(_csv_text(["x", "verdict", "certificate", "point_mass",
                             "c0_slope"], rows))
    else:
        out.write("\n".join(_json_dumps(d) for d in docs) + "\n")
    return EXIT_OK


def cmd_reiter(args, cfg) -> int:
    fam = _family_from_args(args, cfg)
    xs = _resolve_points(fam, args.x)
    if len(xs) != 1:
        raise ConfigError("--x must name exactly one point")
    x = xs[0]
    M = float(_effective(args, cfg, "M", 10.0))
    c_radius = int(_effective(args, cfg, "c_radius", 2))
    support = int(_effective(args, cfg, "support", 24))
    table = build_table(fam, support + c_radius + 2)
    alpha = fam.character(x)
    C = list(range(c_radius + 1))
    sizes, certs = [], []
    n = 8
    while n < support:
        sizes.append(n)
        n *= 2
    sizes.append(support)
    for n in sizes:
        certs.append(reiter_lp(table, alpha, C=C, S=range(n + 1), M=M))
    final = certs[-1]
    doc = final.as_dict()
    doc["family"] = fam.label()
    doc["x"] = x
    doc["epsilon_curve"] = [[n, c.epsilon] for n, c in zip(sizes, certs)]
    out = _Out(args.out)
    out.write(_json_dumps(doc) + "\n")
    if args.curve_out:
        rows = [(n, c.epsilon, c.residuals["max_translation_residual"])
                for n, c in zip(sizes, certs)]
        Path(args.curve_out).write_text(
            _csv_text(["N", "epsilon", "verified_residual"], rows),
            encoding="utf-8")
        if not args.no_plot:
            from .plotting import save_reiter_plot
            save_reiter_plot(str(Path(args.curve_out).with_suffix(".png")),
                             sizes, [c.epsilon for c in certs],
                             f"Reiter epsilon(N), {fam.label()}, x={x:g}")
    return EXIT_OK


def _finite_from_spec(spec: dict) -> FiniteTable:
    if "group" in spec:
        return FiniteTable.cyclic_group(int(spec["group"]),
                                        prefix=spec.get("prefix", "g"))
    if "table" in spec:
        return FiniteTable.from_json_dict(spec["table"])
    raise ConfigError("H spec needs {'group': n} or {'table': {...}}")


def cmd_join(args, cfg) -> int:
    try:
        h_spec = json.loads(args.H)
        j_spec = json.loads(args.J)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad join spec: {exc}") from None
    H = _finite_from_spec(h_spec)
    depth = int(_effective(args, cfg, "depth", 8))
    if "family" in j_spec:
        fam = family_from_spec(j_spec)
        J = build_table(fam, max(depth * 2 + 4, 16))
    elif "group" in j_spec:
        fam = None
        J = FiniteTable.cyclic_group(int(j_spec["group"]),
                                     prefix=j_spec.get("prefix", "j"))
    else:
        raise ConfigError("J spec needs a family or a group")
    K = join(H, J, j_window=depth * 2 + 4)
    rep = verify_join_axioms(K, depth)
    doc = {"axioms": rep.as_dict()}
    if args.dual:
        if not isinstance(J, FiniteTable):
            raise ConfigError("--dual needs a finite J")
        chars = join_dual_enumerate(K)
        doc["dual_count"] = len(chars)
        doc["dual"] = [[[repr(k), _complex_repr(c.value(k))]
                        for k in K.indices(depth)] for c in chars]
    if args.transfer_x is not None:
        if fam is None:
            raise ConfigError("--transfer-x needs a polynomial J")
        xs = _resolve_points(fam, args.transfer_x)
        transfers = []
        for x in xs:
            vj, vk = transfer_check(H, J, fam.character(x),
                                    int(_effective(args, cfg, "N", 200)))
            transfers.append({"x": x, "verdict_J": vj.tag, "verdict_K": vk.tag,
                              "agree": vj.tag == vk.tag})
        doc["transfer"] = transfers
    _Out(args.out).write(_json_dumps(doc) + "\n")
    return EXIT_OK if rep.passed else EXIT_STRUCTURE


def _complex_repr(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return float(v)


def cmd_scan_decay(args, cfg) -> int:
    name = _effective(args, cfg, "family", None)
    N = int(_effective(args, cfg, "N", 64))
    if name == "disc":
        params = _parse_params(args.params or "")
        z = complex(args.z.replace(" ", "")) if args.z else 0.6 + 0.0j
        rep = disc_diagonal_probe(float(params.get("aprime", 0.0)), z, N)
        title = f"disc(a'={params.get('aprime', 0.0):g}) diagonal at z={z}"
    else:
        fam = _family_from_args(args, cfg)
        xs = _resolve_points(fam, args.x)
        if len(xs) != 1:
            raise ConfigError("--x must name exactly one point")
        from .twovar import decay_probe_pairs
        P = fam.eval_character(xs[0], N)
        rep = decay_probe_pairs(lambda n: P[n], N, direction="(n)")
        title = f"|P_n({xs[0]:g})|, {fam.label()}"
    rows = rep.rows()
    out = _Out(args.out)
    out.write(_csv_text(["n", "abs_P", "loglog_slope"], rows))
    png = out.sibling_png()
    if png and not args.no_plot:
        from .plotting import save_decay_plot
        save_decay_plot(png, rep.n_values, rep.magnitudes, title)
    summary = {"direction": rep.direction, "slope": rep.slope,
               "verdict": rep.verdict, "last_value": rep.last_value}
    sys.stderr.write(_json_dumps(summary) + "\n")
    return EXIT_OK


def cmd_orthocheck(args, cfg) -> int:
    fam = _family_from_args(args, cfg)
    N = int(_effective(args, cfg, "N", 10))
    dev, D = orthogonality_check(fam, N, return_matrix=True)
    out = _Out(args.out)
    if args.format == "csv":
        rows = [(n, m, float(D[n, m])) for n in range(N + 1)
                for m in range(N + 1)]
        out.write(_csv_text(["n", "m", "abs_deviation"], rows))
        png = out.sibling_png()
        if png and not args.no_plot:
            from .plotting import save_gram_plot
            save_gram_plot(png, D, f"Gram deviations, {fam.label()}")
    else:
        doc = {"family": fam.label(), "N": N, "max_gram_deviation": dev}
        out.write(_json_dumps(doc) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
#  Parser
# ---------------------------------------------------------------------------

def _add_family_opts(p: argparse.ArgumentParser):
    p.add_argument("--family", choices=sorted(FAMILY_BUILDERS) + ["disc"],
                   help="family name")
    p.add_argument("--params", help="family parameters: 'a=2,b=4' or JSON")
    p.add_argument("-N", type=int, dest="N", help="truncation / window size")


def _add_io_opts(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--no-plot", action="store_true",
                   help="skip the PNG next to CSV output")
    p.add_argument("--config", help="JSON config file (flags win)")


def _add_tol_opts(p: argparse.ArgumentParser, which: str):
    if which == "verify":
        p.add_argument("--tol-neg", type=float, dest="tol_neg",
                       help="negativity tolerance (default 1e-12)")
        p.add_argument("--tol-mass", type=float, dest="tol_mass",
                       help="row-sum tolerance (default 1e-10)")
        p.add_argument("--tol-coeff", type=float, dest="tol_coeff",
                       help="coefficient-sum tolerance (default 1e-12)")
    elif which == "classify":
        p.add_argument("--tol-decay-tail", type=float, dest="tol_decay_tail",
                       help="C0 tail-max threshold (default 0.5)")
        p.add_argument("--tol-decay-slope", type=float, dest="tol_decay_slope",
                       help="C0 slope threshold (default -0.1)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hyplab",
        description="Polynomial hypergroups, joins, and character "
                    "amenability diagnostics")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("family-info", help="dump (n, a_n, b_n, c_n, h_n)")
    _add_family_opts(p)
    _add_io_opts(p)
    p.set_defaults(func=cmd_family_info)

    p = sub.add_parser("dump-table", help="export the convolution table as JSON")
    _add_family_opts(p)
    _add_io_opts(p)
    p.set_defaults(func=cmd_dump_table)

    p = sub.add_parser("verify", help="hypergroup axiom sweep")
    _add_family_opts(p)
    _add_io_opts(p)
    _add_tol_opts(p, "verify")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", help="amenability verdicts on points or a grid")
    _add_family_opts(p)
    p.add_argument("--grid", help="lo:hi:steps")
    p.add_argument("--points", help="comma list of x values (graph: s0/s1 allowed)")
    _add_io_opts(p)
    _add_tol_opts(p, "classify")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("reiter", help="Reiter P1 certificate via LP")
    _add_family_opts(p)
    p.add_argument("--x", required=True, help="character point (graph: s0/s1)")
    p.add_argument("--M", type=float, help="l1 bound (default 10)")
    p.add_argument("--c-radius", type=int, dest="c_radius",
                   help="compact set = ball of this radius around e")
    p.add_argument("--support", type=int, help="largest support size")
    p.add_argument("--curve-out", dest="curve_out",
                   help="CSV path for the epsilon(N) curve")
    _add_io_opts(p)
    p.set_defaults(func=cmd_reiter)

    p = sub.add_parser("join", help="build H v J, verify axioms, dual, transfer")
    p.add_argument("--H", required=True, help='e.g. {"group": 2}')
    p.add_argument("--J", required=True,
                   help='e.g. {"family": "graph", "params": {"a": 2, "b": 4}}')
    p.add_argument("--depth", type=int, help="verification window")
    p.add_argument("--dual", action="store_true", help="enumerate characters")
    p.add_argument("--transfer-x", dest="transfer_x",
                   help="points for the amenability transfer check")
    p.add_argument("-N", type=int, dest="N")
    _add_io_opts(p)
    p.set_defaults(func=cmd_join)

    p = sub.add_parser("scan-decay", help="CSV probe of |P_n(x)| decay")
    _add_family_opts(p)
    p.add_argument("--x", help="evaluation point")
    p.add_argument("--z", help="disc evaluation point, e.g. 0.6 or 0.4+0.3j")
    _add_io_opts(p)
    p.set_defaults(func=cmd_scan_decay)

    p = sub.add_parser("orthocheck", help="quadrature Gram-matrix deviation")
    _add_family_opts(p)
    _add_io_opts(p)
    p.set_defaults(func=cmd_orthocheck)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _load_config(getattr(args, "config", None))
        return args.func(args, cfg)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except StructureError as exc:
        sys.stderr.write(f"structure error: {exc}\n")
        return EXIT_STRUCTURE
    except LpInfeasibleError as exc:
        sys.stderr.write(f"LP infeasible: {exc}\n")
        return EXIT_LP
    except HyplabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())

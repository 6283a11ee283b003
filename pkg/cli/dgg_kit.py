# cli/dgg_kit.py
"""
Command-line front end.

    python -m cli.dgg_kit zeta --t 1 --d 1
    python -m cli.dgg_kit dgg-verify --generate path:21 --b1 0 --b2 20 --gamma 1 --t 1:40:40
    python -m cli.dgg_kit eigenbound --generate path:21 --set 0-4 --set 16-20

Exit codes: 0 pass, 1 verification failure (report still written),
2 usage or data error. Reports go to stdout or --out; everything else to
stderr.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from dggkit import curvature, dgg_bounds, estimates, legendre
from dggkit.graph_core import (
    GraphError, MeasuredGraph, diameter, distances_from, exhaust, generate,
    load_graph, parse_vertex_list, structural_constants,
)
from dggkit.heat_kernel import MonotonicityError, heat_kernels, minimal_heat_kernel
from dggkit.operators import SpectrumError, VertexFunction, dirichlet_spectrum
from dggkit.report import SCHEMA, VerificationReport

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

DEFAULT_T_GRID = "0.5:20:40"

# the named result each subcommand computes or checks
RESULTS: Dict[str, str] = {
    "info": "Graph structure",
    "spectrum": "Dirichlet eigenvalue problem",
    "heat": "Heat kernel",
    "zeta": "Legendre associate of cosh - 1",
    "curvature": "Bakry-Emery curvature-dimension inequalities CD(n, K) and CDE(n, K)",
    "dgg-verify": "Davies-Gaffney-Grigor'yan bound",
    "imp-monitor": "Integral maximum principle",
    "eigenbound": "Chung-Grigor'yan-Yau eigenvalue upper bound",
    "diameter": "Chung-Grigor'yan-Yau diameter bound",
    "isoperimetric": "Neighborhood isoperimetric bound",
    "mixing": "Spectral-gap mixing estimate",
    "liyau": "Li-Yau gradient estimate",
    "harnack": "Li-Yau Harnack inequality",
    "cheng": "Cheng's eigenvalue estimate",
    "gaussian-fit": "Gaussian heat kernel upper bound",
}


class UsageError(ValueError):
    """Bad command-line value that argparse could not catch."""


# ======================================================================
# Parsing helpers
# ======================================================================

def parse_t_grid(spec: str) -> List[float]:
    """
    "start:stop:count" -> linear grid, "start:stop:countL" -> geometric grid.
    The result holds at least two strictly increasing nonnegative times.
    """
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"t-grid must look like start:stop:count, got {spec!r}")
    raw_count = parts[2].strip()
    geometric = raw_count.upper().endswith("L")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(raw_count[:-1] if geometric else raw_count)
    except ValueError:
        raise UsageError(f"bad t-grid {spec!r}") from None
    if count < 2 or not start < stop or start < 0:
        raise UsageError(f"t-grid needs count >= 2 and 0 <= start < stop, got {spec!r}")
    if geometric:
        if start <= 0:
            raise UsageError("a geometric t-grid needs start > 0")
        times = np.geomspace(start, stop, count)
    else:
        times = np.linspace(start, stop, count)
    return [float(t) for t in times]


def parse_float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def parse_int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def parse_dimension(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"dimension must be positive, got {text!r}")
    return value


def parse_pair(text: str) -> Tuple[str, str]:
    """
    "x,y" or "x;y". Lattice ids carry commas themselves, so "0,0,1,0" splits
    at its middle comma into ("0,0", "1,0").
    """
    if ";" in text:
        x, _, y = text.partition(";")
    else:
        commas = [i for i, ch in enumerate(text) if ch == ","]
        if len(commas) % 2 == 0:
            raise argparse.ArgumentTypeError(f"pair must look like x,y or x;y, got {text!r}")
        cut = commas[len(commas) // 2]
        x, y = text[:cut], text[cut + 1:]
    if not x.strip() or not y.strip():
        raise argparse.ArgumentTypeError(f"pair must look like x,y or x;y, got {text!r}")
    return x.strip(), y.strip()


# ======================================================================
# Inputs
# ======================================================================

def load_input_graph(args: argparse.Namespace) -> MeasuredGraph:
    if args.graph:
        with open(args.graph, "rb") as f:
            return load_graph(f.read())
    if args.generate:
        return generate(args.generate, m_mode=args.m_mode)
    raise UsageError("give a graph with --graph FILE or --generate SPEC")


def _certificate(args: argparse.Namespace, g: MeasuredGraph, x: str) -> curvature.CurvatureCertificate:
    if args.estimate:
        return curvature.estimate_curvature(
            g, x, n=args.n, kind=curvature.KIND_CDE,
            restarts=args.restarts, seed=args.seed,
        )
    return curvature.certificate_from_bound(g, x, args.n, -args.K, kind=curvature.KIND_CDE)


# ======================================================================
# Output
# ======================================================================

def _document(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def _emit(text: str, out: Optional[str]) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _rows_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _summarize(report: VerificationReport) -> None:
    status = report.effective_status()
    print(f"[{report.check}] {len(report.entries)} inequalities checked "
          "(margin = RHS - LHS, negative means violated)", file=sys.stderr)
    for e in report.failures[:20]:
        print(f"    FAIL {e.label}: lhs={e.lhs:.10g} rhs={e.rhs:.10g} margin={e.margin:.3e}",
              file=sys.stderr)
    for note in report.notes:
        print(f"    note: {note}", file=sys.stderr)
    worst = report.worst
    if worst is not None:
        print(f"    worst margin {worst.margin:.6e} at {worst.label}", file=sys.stderr)
    print(f"Verdict: {status}", file=sys.stderr)


def _finish(report: VerificationReport, args: argparse.Namespace) -> int:
    _summarize(report)
    text = report.to_csv() if args.format == "csv" else report.to_json()
    _emit(text, args.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def _finish_document(payload: Dict[str, Any], args: argparse.Namespace,
                     csv_rows: Optional[Tuple[Sequence[str], Sequence[Sequence[Any]]]] = None) -> int:
    if args.format == "csv" and csv_rows is not None:
        _emit(_rows_csv(*csv_rows), args.out)
    else:
        _emit(_document({"schema": SCHEMA, **payload}), args.out)
    return EXIT_PASS


# ======================================================================
# Commands
# ======================================================================

def cmd_info(args: argparse.Namespace) -> int:
    g = load_input_graph(args)
    consts = structural_constants(g)
    payload = {
        "check": "info",
        "vertices": len(g),
        "edges": len(g.edges),
        "volume": g.total_measure,
        "diameter": diameter(g),
        "lambda_2": dirichlet_spectrum(g).spectral_gap,
        **consts._asdict(),
    }
    rows = [(k, payload[k]) for k in sorted(payload) if k != "check"]
    return _finish_document(payload, args, (["key", "value"], rows))


def cmd_spectrum(args: argparse.Namespace) -> int:
    g = load_input_graph(args)
    omega = parse_vertex_list(g, args.omega) if args.omega else None
    spectrum = dirichlet_spectrum(g, omega)
    values = [float(v) for v in spectrum.eigenvalues]
    if args.k:
        values = values[: args.k]
    payload = {
        "check": "spectrum",
        "domain_size": len(spectrum.domain),
        "dirichlet": omega is not None,
        "eigenvalues": values,
    }
    rows = [(i + 1, repr(v)) for i, v in enumerate(values)]
    return _finish_document(payload, args, (["index", "eigenvalue"], rows))


def cmd_heat(args: argparse.Namespace) -> int:
    times = parse_t_grid(args.t)
    if args.exhaust:
        family, _, parameter = args.exhaust.partition(":")
        ex = exhaust(family, int(parameter or 1), parse_int_list(args.radii))
        x = args.x or ex.root
        y = args.y or ex.root
        rows = []
        for t in times:
            result = minimal_heat_kernel(ex, x, y, t)
            rows.append({"t": t, "value": result.value, "stages": result.stage_values,
                         "converged": result.converged})
        payload = {"check": "minimal-heat-kernel", "x": x, "y": y,
                   "radii": list(ex.radii), "values": rows}
        csv_rows = [(r["t"], repr(r["value"]), r["converged"]) for r in rows]
        return _finish_document(payload, args, (["t", "value", "converged"], csv_rows))

    g = load_input_graph(args)
    x = args.x or g.vertices[0]
    y = args.y or x
    omega = parse_vertex_list(g, args.omega) if args.omega else None
    rows = [{"t": k.time, "value": k.entry(x, y)} for k in heat_kernels(g, omega, times)]
    payload = {"check": "heat-kernel", "x": x, "y": y, "dirichlet": omega is not None,
               "values": rows}
    return _finish_document(payload, args, (["t", "value"], [(r["t"], repr(r["value"])) for r in rows]))


def cmd_zeta(args: argparse.Namespace) -> int:
    value = legendre.zeta(args.t, args.d)
    print(f"{value:.7f}")
    if args.sigma is None:
        return EXIT_PASS
    report = legendre.zeta_bounds_check(args.t, args.d, args.sigma)
    _summarize(report)
    if args.out:
        _emit(report.to_csv() if args.format == "csv" else report.to_json(), args.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_curvature(args: argparse.Namespace) -> int:
    g = load_input_graph(args)
    x = args.x or g.vertices[0]
    cert = curvature.estimate_curvature(
        g, x, n=args.n, kind=args.kind, restarts=args.restarts,
        seed=args.seed, max_evaluations=args.max_evaluations,
    )
    print(f"{cert.kind}(n={cert.dimension_n:g}) at {x}: K <= {cert.bound_K:.10g} "
          f"[{cert.status}, {cert.agreeing}/{cert.admissible_restarts} restarts agree]",
          file=sys.stderr)
    return _finish_document({"check": "curvature", "certificate": cert.to_dict()}, args)


def _dgg_params(args: argparse.Namespace, g: MeasuredGraph) -> dgg_bounds.DggParams:
    return dgg_bounds.DggParams.for_graph(g, args.gamma, beta=args.beta)


def cmd_dgg_verify(args: argparse.Namespace) -> int:
    g = load_input_graph(args)
    omega = parse_vertex_list(g, args.omega) if args.omega else None
    report = dgg_bounds.verify_dgg(
        g,
        parse_vertex_list(g, args.b1),
        parse_vertex_list(g, args.b2),
        _dgg_params(args, g),
        parse_t_grid(args.t),
        mode=args.mode,
        Omega=omega,
    )
    return _finish(report, args)


def cmd_imp_monitor(args: argparse.Namespace) -> int:
    g = load_input_graph(args)
    omega = parse_vertex_list(g, args.omega) if args.omega else None
    B = parse_vertex_list(g, args.b)
    params = _dgg_params(args, g)
    times = parse_t_grid(args.t)
    report = dgg_bounds.imp_monitor(g, omega, B, params, times)
    if args.weights:
        weights = dgg_bounds.check_weight_condition(g, B, params, times)
        report.entries.extend(weights.entries)
        report.notes.extend(weights.notes)
    return _finish(report, args)


def cmd_eigenbound(args: argparse.Namespace) -> int:
    g = load_input_graph(args)
    if not args.set or len(args.set) < 2:
        raise UsageError("eigenbound needs at least two --set options")
    inp = estimates.EigenBoundInput.from_sets(g, [parse_vertex_list(g, s) for s in args.set])
    sigma: estimates.SigmaChoice = args.sigma
    if args.sigma not in (estimates.SIGMA_AUTO, estimates.SIGMA_AUTO_UNIT):
        sigma = float(args.sigma)
    report = estimates.eigenvalue_check(inp, sigma)
    _summarize(report)
    if args.format == "csv":
        _, rows = estimates.eigenvalue_upper_bound(inp)
        _emit(estimates.eigen_table_csv(rows), args.out)
    else:
        _emit(report.to_json(), args.out)
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_diameter(args: argparse.Namespace) -> int:
    return _finish(estimates.diameter_check(load_input_graph(args)), args)


def cmd_isoperimetric(args: argparse.Namespace) -> int:
    g = load_input_graph(args)
    U = parse_vertex_list(g, args.u)
    return _finish(estimates.isoperimetric_check(g, U, parse_int_list(args.r)), args)


def cmd_mixing(args: argparse.Namespace) -> int:
    g = load_input_graph(args)
    return _finish(estimates.mixing_monitor(g, parse_t_grid(args.t)), args)


def _tent(g: MeasuredGraph, x0: str, R: int) -> VertexFunction:
    dist = distances_from(g, g.subset([x0]))
    return VertexFunction(g, np.clip(1.0 - dist / float(R), 0.0, 1.0))


def cmd_liyau(args: argparse.Namespace) -> int:
    g = load_input_graph(args)
    x0 = args.x0 or g.vertices[0]
    u0 = VertexFunction.indicator(g, parse_vertex_list(g, args.u0) if args.u0 else [x0])
    cert = _certificate(args, g, x0)
    times = parse_t_grid(args.t)
    if args.strong is not None:
        phi = _tent(g, x0, args.R)
        support = g.subset(phi.support())
        report = estimates.li_yau_strong_check(
            g, cert, phi, x0, support, args.strong, args.R, u0, times,
            rho=args.rho if args.rho is not None else 0.5, q=args.q,
        )
    else:
        report = estimates.li_yau_check(g, cert, x0, args.R, u0, times, rho=args.rho, q=args.q)
    return _finish(report, args)


def cmd_harnack(args: argparse.Namespace) -> int:
    g = load_input_graph(args)
    x0 = args.pair[0][0] if args.pair else g.vertices[0]
    cert = _certificate(args, g, x0)
    params = estimates.HarnackParams.from_certificate(
        cert, q=args.q, rho=args.rho if args.rho is not None else 0.5, T1=args.T1, T2=args.T2,
    )
    u0 = VertexFunction.indicator(g, parse_vertex_list(g, args.u0) if args.u0 else [x0])
    pairs = args.pair or [(x0, y) for y in g.vertices]
    return _finish(estimates.harnack_check(g, params, u0, pairs), args)


def cmd_cheng(args: argparse.Namespace) -> int:
    family, _, parameter = args.exhaust.partition(":")
    ex = exhaust(family, int(parameter or 1), parse_int_list(args.radii))
    cert = _certificate(args, ex.host, ex.root)
    return _finish(estimates.cheng_check(ex, cert), args)


def cmd_gaussian_fit(args: argparse.Namespace) -> int:
    g = load_input_graph(args)
    x0 = args.x0 or g.vertices[0]
    cert = _certificate(args, g, x0)
    times = parse_float_list(args.times)
    fit = estimates.gaussian_fit(
        g, cert, args.gamma, args.epsilon, args.beta,
        parse_float_list(args.c2), estimates.all_pairs_sample(g, times),
    )
    print(f"C3={fit.C3:.10g}; frontier (C2, C1): "
          + ", ".join(f"({c2:g}, {c1:.6g})" for c2, c1 in fit.frontier), file=sys.stderr)
    if args.mixing_t:
        report = estimates.finite_mixing_check(g, fit, parse_t_grid(args.mixing_t))
        report.extra["fit"] = fit.as_dict()
        return _finish(report, args)
    rows = [(c2, repr(c1)) for c2, c1 in fit.frontier]
    return _finish_document({"check": "gaussian-fit", "fit": fit.as_dict()}, args, (["C2", "C1"], rows))


# ======================================================================
# Parser
# ======================================================================

def _graph_options(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--graph", help="graph file (JSON document)")
    src.add_argument("--generate", help="generator spec: path:N, star:k,n, lattice:dim,R, tree:degree,R")
    p.add_argument("--m-mode", choices=["unit", "degree"], default="unit",
                   help="vertex measure for generated graphs (default: unit)")


def _output_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")


def _certificate_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=parse_dimension, default=2.0, help="dimension n (default: 2)")
    p.add_argument("--K", type=float, default=0.0,
                   help="curvature lower bound is -K; asserted unless --estimate (default: 0)")
    p.add_argument("--estimate", action="store_true",
                   help="estimate CDE(n, K) numerically instead of asserting --K")
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dgg_kit",
        description="Numerical checks of heat kernel, curvature and eigenvalue inequalities on graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler: Callable[[argparse.Namespace], int], help_text: str,
            graph: bool = True) -> argparse.ArgumentParser:
        text = f"{RESULTS[name]}: {help_text}"
        p = sub.add_parser(name, help=text, description=text)
        if graph:
            _graph_options(p)
        _output_options(p)
        p.set_defaults(handler=handler)
        return p

    add("info", cmd_info, "D_m, D_mu, m_max, m_min, mu_min, volume, diameter and lambda_2.")

    p = add("spectrum", cmd_spectrum, "eigenvalues of the (Dirichlet) Laplacian.")
    p.add_argument("--omega", help="Dirichlet domain as a vertex list (default: whole graph)")
    p.add_argument("--k", type=int, default=None, help="print only the first k eigenvalues")

    p = add("heat", cmd_heat, "p_t(x, y) on a Dirichlet domain, the whole graph, or minimal via an exhaustion.")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--omega", help="Dirichlet domain as a vertex list")
    p.add_argument("--t", default=DEFAULT_T_GRID, help=f"t-grid start:stop:count[L] (default: {DEFAULT_T_GRID})")
    p.add_argument("--exhaust", help="infinite family for the minimal kernel, e.g. lattice:1 or tree:3")
    p.add_argument("--radii", default="2,4,8", help="exhaustion radii (default: 2,4,8)")

    p = add("zeta", cmd_zeta, "zeta(t, d) and its quadratic envelopes.", graph=False)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--sigma", type=float, default=None, help="also check the envelopes for this sigma")

    p = add("curvature", cmd_curvature, "multi-start estimate of the curvature bound at a vertex.")
    p.add_argument("--x")
    p.add_argument("--n", type=parse_dimension, default=math.inf, help="dimension (default: inf)")
    p.add_argument("--kind", choices=list(curvature.KINDS), default=curvature.KIND_CDE)
    p.add_argument("--restarts", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-evaluations", type=int, default=None)

    p = add("dgg-verify", cmd_dgg_verify, "heat flow between two sets.")
    p.add_argument("--b1", required=True, help="first set, e.g. 0 or 0-4")
    p.add_argument("--b2", required=True, help="second set")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--mode", choices=list(dgg_bounds.MODES), default=dgg_bounds.MODE_THEOREM,
                   help="theorem (zeta form) or corollary (Gaussian form)")
    p.add_argument("--omega", help="Dirichlet domain (default: whole graph)")
    p.add_argument("--t", default="1:40:40", help="t-grid (default: 1:40:40)")

    p = add("imp-monitor", cmd_imp_monitor, "monotonicity of the weighted heat energy.")
    p.add_argument("--b", required=True, help="initial set B, u(0) = 1_B")
    p.add_argument("--gamma", type=float, default=dgg_bounds.GOLDEN_GAMMA)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--omega", help="Dirichlet domain (default: whole graph)")
    p.add_argument("--t", default="0:10:50", help="t-grid (default: 0:10:50)")
    p.add_argument("--weights", action="store_true", help="also check the weight condition on every edge")

    p = add("eigenbound", cmd_eigenbound,
            "bound on lambda_k from k disjoint sets, exact and simplified.")
    p.add_argument("--set", action="append", help="one set per option (repeat k >= 2 times)")
    p.add_argument("--sigma", default=estimates.SIGMA_AUTO,
                   help="auto, auto-unit or a positive number (default: auto)")

    add("diameter", cmd_diameter, "diameter in terms of lambda_2 and the volume.")

    p = add("isoperimetric", cmd_isoperimetric, "lower bound on the measure of r-neighborhoods.")
    p.add_argument("--u", required=True, help="the set U")
    p.add_argument("--r", default="1,2,3", help="radii (default: 1,2,3)")

    p = add("mixing", cmd_mixing,
            "convergence of the heat kernel to 1/m(V): monotonicity of h_t(x,x) e^{lambda_2 t}.")
    p.add_argument("--t", default="0.1:20:30", help="t-grid (default: 0.1:20:30)")

    p = add("liyau", cmd_liyau, "weak form, or the strong cut-off form with --strong, for a positive heat solution.")
    p.add_argument("--x0")
    p.add_argument("--R", type=int, default=2)
    p.add_argument("--u0", help="initial datum support (default: x0)")
    p.add_argument("--t", default="0.5:10:20", help="t-grid (default: 0.5:10:20)")
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--strong", type=float, default=None, metavar="C",
                   help="use the strong cut-off form with a tent cut-off of radius R and constant C")
    _certificate_options(p)

    p = add("harnack", cmd_harnack, "between two times and two vertices.")
    p.add_argument("--pair", type=parse_pair, action="append", help="x,y or x;y, lattice ids as 0,0,1,0 (repeatable)")
    p.add_argument("--u0", help="initial datum support (default: first vertex of the first pair)")
    p.add_argument("--T1", type=float, default=1.0)
    p.add_argument("--T2", type=float, default=2.0)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--q", type=float, default=0.0)
    _certificate_options(p)

    p = add("cheng", cmd_cheng, "mu <= K n on an infinite family.", graph=False)
    p.add_argument("--exhaust", required=True, help="infinite family, e.g. tree:3 or lattice:1")
    p.add_argument("--radii", default="3,4,5", help="exhaustion radii (default: 3,4,5)")
    _certificate_options(p)

    p = add("gaussian-fit", cmd_gaussian_fit,
            "fit its constants; optionally check finite-graph mixing.")
    p.add_argument("--x0", help="vertex for the curvature certificate")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--c2", default="0,0.5,1,2", help="C2 grid (default: 0,0.5,1,2)")
    p.add_argument("--times", default="1,2,4,8", help="sample times (default: 1,2,4,8)")
    p.add_argument("--mixing-t", help="t-grid for the finite-graph mixing check")
    _certificate_options(p)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except (GraphError, SpectrumError, MonotonicityError, ValueError, OSError) as exc:
        print(f"dgg_kit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())

"""Batch command-line front end.

Subcommands: generate, kernel, embed, unfold, oos.  Exit codes: 0 success,
2 usage/validation, 3 data or graph errors, 4 solver non-convergence (the
report is still written).  A config file of ``key = value`` lines supplies
defaults that explicit flags override; UNFOLDKIT_LOG sets log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import __version__, io
from .data import Dataset
from .datasets import MANIFOLD_NAMES, ManifoldSpec, generate
from .embedding import embed_from_kernel, intrinsic_dimension
from .graph import (DisconnectedGraphError, build_knn_graph,
                    euclidean_distance_matrix, geodesic_distances,
                    graph_laplacian, lle_alignment, diffusion_operator)
from .kernels import CATALOG_METHODS, KernelMatrix, build_catalog_kernel
from .mvu import assemble_mvu, solve_mvu
from .oos import (embed_oos_eigen, embed_oos_kernel_map, fit_kernel_map,
                  fit_oos_eigen, model_from_json, model_to_json,
                  OosEigenModel, OosKernelMap)
from .sdp import SolverOptions
from .variants import (SupervisedConfig, assemble_are, assemble_colored_mvu,
                       assemble_smvu1, assemble_smvu2, conformal_targets,
                       assemble_landmark_mvu, landmark_Q, prune_short_circuits,
                       select_landmarks, solve_landmark_mvu)

log = logging.getLogger("unfoldkit")

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_SOLVER = 4

VARIANTS = ("mvu", "colored", "smvu1", "smvu2", "conformal", "pruned",
            "landmark", "are")


class UsageError(ValueError):
    pass


def _setup_logging():
    level = os.environ.get("UNFOLDKIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


# ---------------------------------------------------------------------------
# Subcommands


def cmd_generate(args) -> int:
    try:
        spec = ManifoldSpec(name=args.manifold, n=args.n, noise=args.noise,
                            seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    gd = generate(spec)
    io.write_points_csv(args.out, gd.dataset)
    if args.params_out:
        io.write_matrix_csv(args.params_out, gd.params.T, prefix="u")
    log.info("wrote %d points to %s", gd.dataset.n, args.out)
    return 0


def _catalog_inputs(method: str, data: Dataset, args):
    if method == "pca":
        return data
    if method == "mds":
        return euclidean_distance_matrix(data)
    graph = build_knn_graph(data, args.k)
    if method == "isomap":
        return geodesic_distances(graph)
    if method == "spectral-clustering":
        return graph
    if method == "laplacian-eigenmap-pinv":
        _, L = graph_laplacian(graph, weight="rbf" if args.sigma else "binary",
                               sigma=args.sigma)
        return L
    if method in ("lle-shift", "lle-pinv"):
        return lle_alignment(data, graph, reg=args.reg)
    if method == "diffusion":
        return diffusion_operator(graph, sigma=args.sigma, alpha=args.alpha,
                                  t=args.t_step)
    raise UsageError(f"unknown kernel method {method!r}")


def cmd_kernel(args) -> int:
    if args.method not in CATALOG_METHODS:
        raise UsageError(f"unknown kernel method {args.method!r}; "
                         f"choose from {CATALOG_METHODS}")
    data = io.read_points_csv(args.infile)
    kernel = build_catalog_kernel(args.method, _catalog_inputs(args.method, data, args))
    io.write_matrix_csv(args.out, kernel.values, prefix="k")
    if args.report:
        io.write_report(args.report,
                        {"method": args.method, "n": kernel.n,
                         "trace": float(np.trace(kernel.values))},
                        config=vars(args) | {"func": args.cmd})
    return 0


def cmd_embed(args) -> int:
    values = io.read_matrix_csv(args.kernel)
    if values.shape[0] != values.shape[1]:
        raise UsageError("kernel file must hold a square matrix")
    kernel = KernelMatrix(values=0.5 * (values + values.T), method="custom")
    spectrum = np.linalg.eigvalsh(kernel.values)[::-1]
    p = args.dim or intrinsic_dimension(spectrum)
    emb = embed_from_kernel(kernel, p)
    io.write_embedding_csv(args.out, emb.coordinates)
    if args.report:
        io.write_report(args.report,
                        {"dim": p, "eigenvalues": emb.eigenvalues,
                         "clamped_negative": emb.clamped},
                        config=vars(args) | {"func": args.cmd})
    return 0


def _solver_options(args) -> SolverOptions:
    kw = {}
    if args.stop_tol is not None:
        kw["stop_tol"] = args.stop_tol
    return SolverOptions(**kw)


def _assemble_variant(args, data: Dataset):
    """Build the requested unfolding program; returns (problem, extras)."""
    extras = {}
    if args.variant == "are":
        if data.actions is None:
            raise UsageError("--variant are needs an actions file (--actions)")
        return assemble_are(data, allow_large=True), extras

    graph = build_knn_graph(
        data, args.k, mode="within-class" if args.variant == "smvu1" else "all-data")
    if args.variant == "pruned":
        pruned = prune_short_circuits(graph, data, threshold=args.prune_threshold,
                                      quantile=args.prune_quantile)
        extras["pruned_edges"] = sorted(pruned.removed)
        graph = pruned.graph
    if args.variant in ("mvu", "pruned"):
        return assemble_mvu(data, graph), extras
    if args.variant == "conformal":
        return assemble_mvu(data, graph,
                            targets=conformal_targets(graph, data)), extras
    if args.variant == "colored":
        return assemble_colored_mvu(data, graph), extras
    if args.variant == "smvu1":
        return assemble_smvu1(data, graph, SupervisedConfig(alpha=args.alpha)), extras
    if args.variant == "smvu2":
        return assemble_smvu2(data, graph), extras
    raise UsageError(f"unknown variant {args.variant!r}")


def _unfold_landmark(args, data: Dataset):
    graph = build_knn_graph(data, args.k)
    landmarks = select_landmarks(data.n, args.landmarks, seed=args.seed)
    Q = landmark_Q(lle_alignment(data, graph, reg=args.reg), landmarks)
    problem = assemble_landmark_mvu(data, graph, Q, landmark_indices=landmarks)
    model, sol = solve_landmark_mvu(problem, opts=_solver_options(args))
    K = model.kernel()
    spectrum = np.linalg.eigvalsh(K)[::-1]
    p = args.dim or (intrinsic_dimension(spectrum) if spectrum[0] > 0 else 1)
    emb = embed_from_kernel(KernelMatrix(values=K, method="landmark-mvu"), p)
    report = {
        "objective_trace": float(np.trace(K)),
        "eigenvalues": spectrum[:p],
        "residuals": {"equality": sol.equality_residual,
                      "inequality": sol.inequality_residual},
        "iterations": sol.newton_iterations,
        "variance_bound": 0.5 * data.n ** 3 * max(graph.lengths.values()) ** 2,
        "landmarks": list(landmarks),
        "converged": sol.converged,
    }
    return emb, report, sol.converged


def cmd_unfold(args) -> int:
    if args.variant not in VARIANTS:
        raise UsageError(f"unknown variant {args.variant!r}; choose from {VARIANTS}")
    if args.variant == "landmark" and not args.landmarks:
        raise UsageError("--variant landmark needs --landmarks")
    data = io.read_points_csv(args.infile)
    if args.actions:
        data = Dataset(points=data.points, labels=data.labels,
                       actions=io.read_actions_csv(args.actions))

    if args.variant == "landmark":
        emb, report, converged = _unfold_landmark(args, data)
    else:
        problem, extras = _assemble_variant(args, data)
        result = solve_mvu(data, p=args.dim or None, problem=problem,
                           opts=_solver_options(args))
        emb = result.embedding
        converged = result.solution.converged
        report = {
            "objective_trace": result.objective_trace,
            "eigenvalues": emb.eigenvalues,
            "residuals": result.constraint_report,
            "iterations": result.solution.newton_iterations,
            "variance_bound": result.variance_bound,
            "converged": converged,
            **extras,
        }
    io.write_embedding_csv(args.out, emb.coordinates)
    if args.report:
        io.write_report(args.report, report, config=vars(args) | {"func": args.cmd})
    if not converged:
        print("solver did not converge; residual report written", file=sys.stderr)
        return EXIT_SOLVER
    return 0


def cmd_oos(args) -> int:
    if args.fit:
        train = io.read_points_csv(args.train)
        if args.fit == "kernel-map":
            Y = io.read_matrix_csv(args.embedding).T
            model = fit_kernel_map(train, Y, gamma=args.gamma)
        elif args.fit == "eigen":
            K = io.read_matrix_csv(args.kernel)
            model = fit_oos_eigen(train, KernelMatrix(values=0.5 * (K + K.T),
                                                      method="custom"),
                                  eta=args.eta)
        else:
            raise UsageError("--fit must be kernel-map or eigen")
        with open(args.model, "w", encoding="utf-8") as fh:
            fh.write(model_to_json(model) + "\n")
        return 0

    with open(args.model, encoding="utf-8") as fh:
        model = model_from_json(fh.read())
    test = io.read_points_csv(args.test)
    if isinstance(model, OosKernelMap):
        out = embed_oos_kernel_map(model, test)
        coords = out.coordinates
        if out.zero_rows:
            print(f"warning: test rows {out.zero_rows} are out of kernel "
                  "range; embedded at zero", file=sys.stderr)
    elif isinstance(model, OosEigenModel):
        coords = np.column_stack(
            [embed_oos_eigen(model, test.points[:, i]) for i in range(test.n)])
    else:  # pragma: no cover
        raise UsageError("unsupported model kind")
    io.write_embedding_csv(args.out, coords)
    return 0


# ---------------------------------------------------------------------------
# Argument plumbing


def _add_solver_flags(p):
    p.add_argument("--stop-tol", type=float, default=None,
                   help="duality-gap stopping tolerance")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="unfoldkit",
                                 description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--config", help="key = value defaults file")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("generate", help="synthesize a manifold sample")
    g.add_argument("--manifold", required=True, choices=MANIFOLD_NAMES)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--params-out")
    g.set_defaults(func=cmd_generate)

    k = sub.add_parser("kernel", help="build a catalog kernel from data")
    k.add_argument("--method", required=True)
    k.add_argument("--in", dest="infile", required=True)
    k.add_argument("--out", required=True)
    k.add_argument("--report")
    k.add_argument("--k", type=int, default=6)
    k.add_argument("--sigma", type=float, default=None)
    k.add_argument("--alpha", type=float, default=0.0)
    k.add_argument("--t-step", type=int, default=1)
    k.add_argument("--reg", type=float, default=1e-3)
    k.set_defaults(func=cmd_kernel)

    e = sub.add_parser("embed", help="spectral embedding of a kernel CSV")
    e.add_argument("--kernel", required=True)
    e.add_argument("--dim", type=int, default=0)
    e.add_argument("--out", required=True)
    e.add_argument("--report")
    e.set_defaults(func=cmd_embed)

    u = sub.add_parser("unfold", help="maximum variance unfolding and variants")
    u.add_argument("--in", dest="infile", required=True)
    u.add_argument("--variant", default="mvu")
    u.add_argument("--k", type=int, default=6)
    u.add_argument("--dim", type=int, default=0)
    u.add_argument("--alpha", type=float, default=2.0,
                   help="class separation factor for smvu1")
    u.add_argument("--actions", help="actions CSV for the are variant")
    u.add_argument("--landmarks", type=int, default=0)
    u.add_argument("--seed", type=int, default=0)
    u.add_argument("--reg", type=float, default=1e-3)
    u.add_argument("--prune-threshold", type=float, default=None)
    u.add_argument("--prune-quantile", type=float, default=None)
    u.add_argument("--out", required=True)
    u.add_argument("--report")
    _add_solver_flags(u)
    u.set_defaults(func=cmd_unfold)

    o = sub.add_parser("oos", help="fit or apply an out-of-sample model")
    o.add_argument("--fit", choices=("kernel-map", "eigen"))
    o.add_argument("--train")
    o.add_argument("--embedding", help="training embedding CSV (kernel-map fit)")
    o.add_argument("--kernel", help="learned kernel CSV (eigen fit)")
    o.add_argument("--gamma", type=float, default=0.3)
    o.add_argument("--eta", type=float, default=None)
    o.add_argument("--model", required=True)
    o.add_argument("--test")
    o.add_argument("--out")
    o.set_defaults(func=cmd_oos)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list) -> list:
    """Pull --config out of argv and turn its entries into leading flags,
    so explicit flags given later override them."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        ap.error("--config needs a path")
    rest = argv[:i] + argv[i + 2:]
    if not rest or rest[0].startswith("-"):
        ap.error("--config must follow the subcommand name")
    cfg = io.read_config_file(path)
    flags = []
    for key, value in sorted(cfg.items()):
        flags.extend([f"--{key.replace('_', '-')}", value])
    return [rest[0]] + flags + rest[1:]


def main(argv=None) -> int:
    _setup_logging()
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config(ap, argv)
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, DisconnectedGraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

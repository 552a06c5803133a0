"""
Command-line front end.

    analogbf design    --preset ula11 --seed 7 --out runs/ula
    analogbf factorize --preset mra7 --out runs/mra_fact
    analogbf scan      --solution runs/ula --scene scene.csv --out runs/img
    analogbf check-grad

Exit status is 0 on success (including an unconverged design, which prints a
warning), 1 on usage or input errors and 2 on numerical failure.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import arrays, factorize, imaging, io, solver
from .plot import db_plot

log = logging.getLogger("analogbf")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
DB_FLOOR = -80.0


class UsageError(Exception):
    pass


def load_config(args):
    if args.preset and args.config:
        base = io.PRESETS[args.preset]
        cfg = io.ExperimentConfig.from_file(args.config, base)
    elif args.preset:
        cfg = io.PRESETS[args.preset]
    elif args.config:
        cfg = io.ExperimentConfig.from_file(args.config)
    else:
        cfg = io.ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.updated({"seed": str(args.seed)})
    return cfg


def geometry(cfg):
    if cfg.array == "ula":
        return arrays.ula(cfg.n)
    if cfg.array == "mra7":
        return arrays.mra7()
    return arrays.ArrayGeometry(cfg.positions)


def design_problem(cfg, geom):
    """Design grid, measurement matrix and desired PSF for ``cfg``."""
    grid = arrays.uniform_grid(cfg.design_points)
    a = arrays.measurement_matrix(geom, geom, grid)
    if cfg.target_file:
        psi = io.read_complex_column(cfg.target_file, "target")
        if psi.size != len(grid):
            raise io.ConfigError(
                f"{cfg.target_file}: {psi.size} samples, design grid has "
                f"{len(grid)}")
    else:
        size = arrays.sum_coarray(geom, geom).size
        psi = arrays.chebyshev_target(size, cfg.sidelobe_db, grid,
                                      cfg.normalize)
    return grid, a, psi


def solver_config(cfg):
    return solver.SolverConfig(step=cfg.step, max_iter=cfg.max_iter,
                               tol=cfg.abs_tol, rel_tol=cfg.eps_rel,
                               restarts=cfg.restarts, seed=cfg.seed,
                               workers=cfg.workers)


def _positions(geom):
    return ", ".join(io.fmt(x) for x in geom.positions)


def _psf_table(out, geom, w, psi_eval, grid):
    realized = imaging.realized_psf(geom, geom, w, grid)
    ref = np.abs(psi_eval).max()
    d_db = arrays.db(psi_eval, DB_FLOOR, ref)
    r_db = arrays.db(realized, DB_FLOOR, ref)
    io.write_table(out / "psf.csv",
                   ["angle_rad", "angle_deg", "desired_re", "desired_im",
                    "realized_re", "realized_im", "desired_db",
                    "realized_db"],
                   [(float(a), float(np.degrees(a)), p.real, p.imag,
                     r.real, r.imag, dd, rd)
                    for a, p, r, dd, rd in zip(grid.angles, psi_eval,
                                               realized, d_db, r_db)])
    return realized, d_db, r_db


def cmd_design(args):
    cfg = load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    geom = geometry(cfg)
    grid, a, psi = design_problem(cfg, geom)
    scfg = solver_config(cfg)
    n = geom.size
    if cfg.mode == "fixed":
        sol = solver.solve_fixed_q(a, psi, n, n, cfg.q, scfg)
    else:
        q_max = cfg.q_max
        if q_max == 0:
            digital, _ = factorize.min_rank_fit(a, psi, n, n, cfg.eps_rel,
                                                seed=cfg.seed)
            q_max = 4 * digital.count
            log.info("digital rank %d, searching Q <= %d", digital.count,
                     q_max)
        sol = solver.minimize_q(a, psi, n, n, q_max, scfg)

    fact = sol.factorization
    summary = {
        "q": sol.q,
        "residual": io.fmt(sol.residual),
        "relative_residual": io.fmt(sol.residual / np.linalg.norm(psi)),
        "iterations": sol.iterations,
        "converged": str(sol.converged).lower(),
        "n_tx": n,
        "n_rx": n,
        "tx_positions": _positions(geom),
        "rx_positions": _positions(geom),
    }
    io.write_solution(out, fact, summary)
    io.write_table(out / "history.csv", ["iteration", "residual"],
                   [(k, float(e)) for k, e in enumerate(sol.history)])

    w = factorize.reconstruct(fact)
    io.write_matrix(out / "W.csv", w)
    egrid = arrays.uniform_grid(cfg.eval_points)
    if cfg.target_file:
        psi_eval = None
    else:
        size = arrays.sum_coarray(geom, geom).size
        psi_eval = arrays.chebyshev_target(size, cfg.sidelobe_db, egrid,
                                           cfg.normalize)
    if psi_eval is not None:
        _, d_db, r_db = _psf_table(out, geom, w, psi_eval, egrid)
        curves = [("desired", d_db, True), (f"realized, Q={sol.q}", r_db,
                                            False)]
    else:
        realized = imaging.realized_psf(geom, geom, w, egrid)
        r_db = arrays.db(realized, DB_FLOOR)
        io.write_table(out / "psf.csv",
                       ["angle_rad", "angle_deg", "realized_re",
                        "realized_im", "realized_db"],
                       [(float(a), float(np.degrees(a)), r.real, r.imag, rd)
                        for a, r, rd in zip(egrid.angles, realized, r_db)])
        curves = [(f"realized, Q={sol.q}", r_db, False)]
    (out / "psf.svg").write_text(
        db_plot(egrid.degrees, curves, title=f"{geom.name}: PSF",
                floor=DB_FLOOR))

    print(f"Q = {sol.q}")
    print(f"residual = {sol.residual:.6e} "
          f"(relative {sol.residual / np.linalg.norm(psi):.6e})")
    print(f"iterations = {sol.iterations}")
    print(f"converged = {str(sol.converged).lower()}")
    if not sol.converged:
        print(f"warning: tolerance {scfg.abs_tol(psi):.3e} not reached",
              file=sys.stderr)
    return EXIT_OK


def factorize_report(w, digital, analog):
    w_hat = factorize.reconstruct(analog)
    norm = np.linalg.norm(w)
    err = np.linalg.norm(w_hat - w)
    return {
        "q_digital": digital.count,
        "q_analog": analog.q,
        "reconstruction_error": io.fmt(err / norm if norm > 0 else err),
        "n_tx": w.shape[1],
        "n_rx": w.shape[0],
    }


def cmd_factorize(args):
    sources = [x for x in (args.matrix, args.solution, args.preset) if x]
    if len(sources) != 1:
        raise UsageError(
            "factorize needs exactly one of --matrix, --solution, --preset")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    geom = None
    if args.matrix:
        w = io.read_matrix(args.matrix)
    elif args.solution:
        fact, summary = io.read_solution(args.solution)
        w = factorize.reconstruct(fact)
        if "tx_positions" in summary:
            geom = arrays.ArrayGeometry(
                io.parse_floats(summary["tx_positions"]))
    else:
        cfg = load_config(args)
        geom = geometry(cfg)
        _, a, psi = design_problem(cfg, geom)
        digital, res = factorize.min_rank_fit(a, psi, geom.size, geom.size,
                                              cfg.eps_rel, seed=cfg.seed)
        log.info("digital fit residual %.3e", res)
        w = digital.matrix()

    digital = factorize.digital_factorize(w)
    analog = factorize.analog_factorize(digital)
    io.write_digital(out / "digital.csv", digital)
    report = factorize_report(w, digital, analog)
    summary = {"q": analog.q, "n_tx": w.shape[1], "n_rx": w.shape[0]}
    if geom is not None:
        summary["tx_positions"] = summary["rx_positions"] = _positions(geom)
    io.write_solution(out, analog, summary)
    io.write_matrix(out / "W.csv", w)
    io.write_keyvalue(out / "report.txt", report)
    for k, v in report.items():
        print(f"{k} = {v}")
    return EXIT_OK


def cmd_scan(args):
    cfg = load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fact, summary = io.read_solution(args.solution)
    if "tx_positions" in summary:
        tx = arrays.ArrayGeometry(io.parse_floats(summary["tx_positions"]))
        rx = arrays.ArrayGeometry(io.parse_floats(summary["rx_positions"]))
    else:
        tx = rx = geometry(cfg)
    if fact.f_t.shape[0] != tx.size or fact.f_r.shape[0] != rx.size:
        raise io.ConfigError("solution size does not match the geometry")
    scatterers = io.read_scene(args.scene) if args.scene else []
    scene = imaging.Scene(scatterers, cfg.noise_std)
    grid = arrays.uniform_grid(cfg.scan_points)
    img = imaging.scan(scene, tx, rx, fact, grid, seed=cfg.seed)
    ref = np.abs(img.pixels).max()
    pix_db = arrays.db(img.pixels, DB_FLOOR, ref)
    io.write_table(out / "image.csv",
                   ["angle_rad", "angle_deg", "composite_re", "composite_im",
                    "composite_db"],
                   [(float(a), float(np.degrees(a)), p.real, p.imag, d)
                    for a, p, d in zip(grid.angles, img.pixels, pix_db)])
    io.write_table(out / "components.csv",
                   ["component", "angle_rad", "re", "im"],
                   [(q, float(a), v.real, v.imag)
                    for q in range(img.q)
                    for a, v in zip(grid.angles, img.components[q])])
    curves = [("composite", pix_db, False)]
    (out / "image.svg").write_text(
        db_plot(grid.degrees, curves, title=f"Composite image, Q={img.q}",
                floor=DB_FLOOR))
    print(f"pixels = {len(grid)}")
    print(f"components = {img.q}")
    print(f"measurements = {img.q * len(grid)}")
    return EXIT_OK


def gradient_check(instances=20, seed=0, h=1e-6):
    """Relative errors of the analytic gradient against finite differences
    on random problems (N_t, N_r <= 6, Q <= 3, V <= 20).

    ``Q`` stays below ``N_t N_r``: otherwise ``K`` spans the range of ``A``
    for every choice of phases and the gradient vanishes identically.
    """
    rng = np.random.default_rng(seed)
    errors = []
    while len(errors) < instances:
        n_t, n_r = (int(x) for x in rng.integers(1, 7, size=2))
        if n_t * n_r < 2:
            continue
        q = int(rng.integers(1, min(3, n_t * n_r - 1) + 1))
        v = int(rng.integers(q + 1, 21))
        a = rng.standard_normal((v, n_t * n_r)) \
            + 1j * rng.standard_normal((v, n_t * n_r))
        psi = rng.standard_normal(v) + 1j * rng.standard_normal(v)
        f_t, f_r = solver.random_start(n_t, n_r, q, rng)
        g = np.concatenate([x.ravel() for x in
                            solver.grad_J(a, psi, f_t, f_r)])
        fd = np.concatenate([x.ravel() for x in
                             solver.finite_diff_grad(a, psi, f_t, f_r, h)])
        errors.append(np.linalg.norm(g - fd) / np.linalg.norm(g))
    return np.array(errors)


def cmd_check_grad(args):
    errs = gradient_check(args.instances, args.seed or 0)
    worst = errs.max()
    print(f"instances = {errs.size}")
    print(f"max_relative_error = {worst:.3e}")
    return EXIT_OK if worst < 1e-5 else EXIT_NUMERIC


def build_parser():
    p = argparse.ArgumentParser(
        prog="analogbf",
        description="Analog beamformer design with image addition.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--config", help="key = value config file")
        sp.add_argument("--preset", choices=sorted(io.PRESETS))
        sp.add_argument("--seed", type=int)
        if out:
            sp.add_argument("--out", required=True, help="output directory")

    d = sub.add_parser("design", help="optimize analog phases")
    common(d)
    d.set_defaults(func=cmd_design)

    f = sub.add_parser("factorize",
                       help="digital and four-per-rank analog factorizations")
    common(f)
    f.add_argument("--matrix", help="CSV with columns row,col,re,im")
    f.add_argument("--solution", help="directory written by design")
    f.set_defaults(func=cmd_factorize)

    s = sub.add_parser("scan", help="simulate a scan with image addition")
    common(s)
    s.add_argument("--solution", required=True)
    s.add_argument("--scene",
                   help="CSV: angle_rad,reflectivity_re,reflectivity_im")
    s.set_defaults(func=cmd_scan)

    g = sub.add_parser("check-grad", help="finite-difference gradient check")
    g.add_argument("--seed", type=int)
    g.add_argument("--instances", type=int, default=20)
    g.set_defaults(func=cmd_check_grad)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (solver.DivergenceError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (io.ConfigError, UsageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

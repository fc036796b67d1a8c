"""Command-line driver: simulate, convergence, and stiffness-sweep runs."""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

from . import stepper
from .diagnostics import equilibrium_distance, observed_order
from .errors import PolykinError, ValidationError
from .field import DistField, error_sup_norm, sample, write_snapshot
from .moments import MACRO_CSV_HEADER, compute_moments, write_macro_csv
from .scenario import Scenario, make_initial, parse_scenario  # noqa: F401 (re-export)


def _set_threads(n: int | None) -> None:
    if n is None:
        return
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=n)
    except ImportError:
        print("warning: threadpoolctl unavailable, --threads ignored", file=sys.stderr)


def _out_dir(args, scn: Scenario) -> Path:
    out = Path(args.out or scn.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    scn = parse_scenario(args.scenario)
    out = _out_dir(args, scn)
    grid, params = scn.validate()

    snapshots = []
    macro_rows = []  # (time, macro) at every snapshot time, plus the final state

    def writer(time, field_obj):
        path = out / f"snapshot_t{time:.6f}.bin"
        write_snapshot(path, field_obj, params.delta, params.q)
        snapshots.append(path)
        macro_rows.append((time, compute_moments(field_obj, params, dt=0.0)))

    result = stepper.run(scn, snapshot_writer=writer)

    final_time = result.reports[-1].time if result.reports else 0.0
    if not macro_rows or macro_rows[-1][0] != final_time:
        macro_rows.append((final_time, compute_moments(result.final, params, dt=0.0)))

    with open(out / "steps.csv", "w", encoding="utf-8") as fh:
        stepper.write_step_csv(fh, result.reports)
    with open(out / "macro.csv", "w", encoding="utf-8") as fh:
        fh.write(MACRO_CSV_HEADER)
        for t_row, macro in macro_rows:
            write_macro_csv(fh, t_row, grid, macro)

    bad = [r.step for r in result.reports
           if not (math.isfinite(r.mass) and math.isfinite(r.energy) and math.isfinite(r.norm_q))]
    if bad:
        print(f"error: non-finite report at step {bad[0]}", file=sys.stderr)
        return 3
    print(f"simulate: {len(result.reports)} steps -> {out / 'steps.csv'}")
    if snapshots:
        print(f"simulate: wrote {len(snapshots)} snapshots")
    return 0


def _coupled_levels(scn: Scenario, levels: list[int], reference: int):
    seen = set()
    for lv in levels:
        if lv in seen:
            raise ValidationError("levels", f"duplicate level {lv}")
        seen.add(lv)
    if any(levels[i + 1] <= levels[i] for i in range(len(levels) - 1)):
        raise ValidationError("levels", f"levels must strictly increase: {levels}")
    if reference <= levels[-1]:
        raise ValidationError("reference", "reference must be finer than every level")
    for lv in levels + [reference]:
        if reference % lv:
            raise ValidationError("levels", f"reference {reference} not divisible by level {lv}")


def cmd_convergence(args) -> int:
    scn = parse_scenario(args.scenario)
    out = _out_dir(args, scn)
    levels = [int(t) for t in args.levels.split(",") if t.strip()]
    if len(levels) < 3:
        raise ValidationError("levels", f"need at least 3 levels, got {levels}")
    reference = int(args.reference)
    _coupled_levels(scn, levels, reference)
    transport_only = args.transport_only or scn.transport_only

    def level_scenario(n_x: int) -> Scenario:
        # coupled refinement dx = dt; in transport-only mode dt stays fixed and
        # only the spatial mesh refines, isolating the interpolation error
        override = {"n_x": n_x, "transport_only": transport_only}
        if not transport_only:
            override["dt"] = 1.0 / n_x
        return dataclasses.replace(scn, **override)

    fields: dict[int, DistField] = {}
    for n_x in levels + ([] if transport_only else [reference]):
        lv_scn = level_scenario(n_x)
        lv_scn.validate()
        result = stepper.run(lv_scn, track_entropy=False)
        fields[n_x] = result.final
        print(f"convergence: level n_x={n_x} done ({len(result.reports)} steps)")

    _, params = scn.validate()
    errors = []
    for n_x in levels:
        coarse = fields[n_x]
        if transport_only:
            # exact transport solution: initial data sampled at the shifted feet
            exact = sample(make_initial(scn, coarse.grid), coarse.grid, shift_dt=scn.t_final)
            err = error_sup_norm(coarse, exact, params.q, params.delta)
        else:
            ref = fields[reference]
            stride = reference // n_x
            restricted = DistField(ref.values[::stride].copy(), coarse.grid)
            err = error_sup_norm(coarse, restricted, params.q, params.delta)
        errors.append(err)

    h = [1.0 / lv for lv in levels]
    table = observed_order(list(zip(h, errors)), labels=[f"n_x={lv}" for lv in levels])
    with open(out / "convergence.csv", "w", encoding="utf-8") as fh:
        table.to_csv(fh)
    md = table.to_markdown()
    (out / "convergence.md").write_text(md, encoding="utf-8")
    print(md, end="")
    return 0


def cmd_sweep(args) -> int:
    scn = parse_scenario(args.scenario)
    out = _out_dir(args, scn)
    kappas = [float(t) for t in args.kappa.split(",") if t.strip()]
    if not kappas:
        raise ValidationError("kappa", "empty kappa list")
    for k in kappas:
        if k <= 0:
            raise ValidationError("kappa", f"kappa must be > 0, got {k}")

    rows = []
    for kappa in kappas:
        k_scn = dataclasses.replace(scn, kappa=kappa)
        k_scn.validate()
        n_steps = k_scn.n_steps()
        stride = max(1, n_steps // 10)
        result = stepper.run(k_scn, track_entropy=False, distance_stride=stride)
        finite = all(
            math.isfinite(r.norm_q) and math.isfinite(r.mass) for r in result.reports
        )
        final_dist = equilibrium_distance(result.final, result.params, dt=k_scn.dt)
        trend = [r.eq_distance for r in result.reports if r.eq_distance is not None]
        rows.append((kappa, finite, final_dist, trend))
        print(f"sweep: kappa={kappa:g} finite={finite} |f-G(f)|_q={final_dist:.6e}")

    with open(out / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write("kappa,finite,final_equilibrium_distance\n")
        for kappa, finite, final_dist, _ in rows:
            fh.write("%.17g,%d,%.17g\n" % (kappa, int(finite), final_dist))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polykin",
        description="Semi-Lagrangian solver for the polyatomic ellipsoidal-BGK equation",
    )
    parser.add_argument("--threads", type=int, default=None, help="cap BLAS worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario and write step/macro CSV output")
    p.add_argument("scenario")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("convergence", help="coupled dx=dt self-convergence study")
    p.add_argument("scenario")
    p.add_argument("--levels", required=True, help="comma list of spatial resolutions")
    p.add_argument("--reference", required=True, help="reference resolution (coupled mode)")
    p.add_argument("--transport-only", action="store_true",
                   help="disable relaxation; fixed dt, exact transport reference")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("sweep", help="Knudsen-number stiffness sweep at fixed dt")
    p.add_argument("scenario")
    p.add_argument("--kappa", required=True, help="comma list of Knudsen numbers")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _set_threads(args.threads)
    try:
        return args.func(args)
    except PolykinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

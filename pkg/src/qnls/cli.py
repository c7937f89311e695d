"""``qnls`` command-line driver.

Exit codes: 0 success, 1 usage/config error, 2 every run diverged, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, Optional

from . import analysis
from .analysis import diagonal_line, run_experiment, run_table
from .config import COMMANDS, KEYS, SOLITON_KEYS, ConfigError, RunConfig, parse_config
from .model import SingleSoliton, TwoSolitons, initial_field
from .qgrid import build_grid
from .scheme import (
    DivergenceError,
    EvolutionConfig,
    assemble_matrix,
    cfl_diagnostic,
    dominance_check,
    evolve,
    time_level,
)

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3

TIME_GRID_NOTE = "time grid t_k = 1 - q^k, l_k = (1-q) q^k; Er unweighted over n = 0..N"


class OutputError(OSError):
    pass


def fmt(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return f"{x:.16e}"


def atomic_write(path: str | Path, text: str) -> None:
    """Write via a temporary sibling and rename, so failures leave no partial file."""
    path = Path(path)
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from exc
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise OutputError(f"cannot write {path}: {exc.strerror}") from exc


def _data(cfg: RunConfig):
    if cfg.experiment == "single-soliton":
        return SingleSoliton(*cfg.solitons)
    return TwoSolitons(*cfg.solitons)


def _csv(rows: Iterable[Iterable[str]]) -> str:
    return "".join(",".join(r) + "\n" for r in rows)


def table_csv(table: analysis.ErrorTable) -> str:
    header = ["K"] + [repr(q) for q in table.q_list] + [f"published_{q!r}" for q in table.q_list]
    rows = [header]
    for i, K in enumerate(table.K_list):
        computed = ["DIV" if math.isnan(v) else fmt(v) for v in table.values[i]]
        published = ["" if math.isnan(v) else fmt(v) for v in table.published[i]]
        rows.append([str(K)] + computed + published)
    return _csv(rows)


def read_table_csv(text: str) -> dict:
    """Inverse of :func:`table_csv`: ``{"q": [...], "K": [...], "values": [[...]], "published": [[...]]}``."""
    lines = text.splitlines()
    header = lines[0].split(",")
    m = (len(header) - 1) // 2
    q = [float(h) for h in header[1 : 1 + m]]
    Ks, values, published = [], [], []
    for line in lines[1:]:
        cells = line.split(",")
        Ks.append(int(cells[0]))
        values.append([math.nan if c == "DIV" else float(c) for c in cells[1 : 1 + m]])
        published.append([math.nan if c == "" else float(c) for c in cells[1 + m :]])
    return {"q": q, "K": Ks, "values": values, "published": published}


def _print_table(table: analysis.ErrorTable, out) -> None:
    print(f"Er table: {table.experiment}, N={table.N}, k0={table.k0} ({TIME_GRID_NOTE})", file=out)
    width = 12
    print("K".rjust(4) + "".join(f"q={q:.4g}".rjust(width * 2) for q in table.q_list), file=out)
    print(" " * 4 + ("computed".rjust(width) + "published".rjust(width)) * len(table.q_list), file=out)
    for i, K in enumerate(table.K_list):
        cells = []
        for v, p in zip(table.values[i], table.published[i]):
            cells.append(("DIV" if math.isnan(v) else f"{v:.3e}").rjust(width))
            cells.append(("-" if math.isnan(p) else f"{p:.3e}").rjust(width))
        print(str(K).rjust(4) + "".join(cells), file=out)


def cmd_table(cfg: RunConfig, out=sys.stdout) -> int:
    params = None if cfg.solitons == _data_defaults(cfg.experiment) else cfg.solitons
    table = run_table(cfg.experiment, cfg.q, cfg.K, cfg.N, params=params, k0=cfg.k0)
    atomic_write(cfg.out, table_csv(table))
    _print_table(table, out)
    print(f"wrote {cfg.out}", file=out)
    return EXIT_DIVERGED if table.all_diverged else EXIT_OK


def _data_defaults(experiment: str) -> tuple:
    if experiment == "single-soliton":
        return (SingleSoliton().params,)
    d = TwoSolitons()
    return (d.first, d.second)


def cmd_run(cfg: RunConfig, out=sys.stdout) -> int:
    """Per-level errors for each (q, K) of a single- or two-soliton run."""
    data = _data(cfg)
    rows = [["q", "N", "K", "k", "t_k", "error"]]
    finite = 0
    print(f"{cfg.experiment}: N={cfg.N}, k0={cfg.k0} ({TIME_GRID_NOTE})", file=out)
    for q in cfg.q:
        for K in cfg.K:
            rep = run_experiment(data, q, cfg.N, K, cfg.k0)
            for j, err in enumerate(rep.per_k):
                k = cfg.k0 + j
                rows.append(
                    [repr(q), str(cfg.N), str(K), str(k),
                     fmt(time_level(q, k)), "DIV" if math.isnan(err) else fmt(err)]
                )
            ref = analysis.published_er(cfg.experiment, cfg.N, q, K)
            shown = "DIV" if rep.diverged else f"{rep.Er:.3e}"
            extra = f"  (published {ref:.3e})" if ref is not None and cfg.k0 == 0 else ""
            print(f"  q={q:.6g} K={K}: Er = {shown}{extra}", file=out)
            finite += not rep.diverged
    atomic_write(cfg.out, _csv(rows))
    print(f"wrote {cfg.out}", file=out)
    return EXIT_OK if finite else EXIT_DIVERGED


def field_dump(trajectory, grid) -> str:
    lines = ["# k t_k n x_n re_U im_U abs_U"]
    for state in trajectory:
        for n, (x, u) in enumerate(zip(grid.points, state.values)):
            lines.append(
                f"{state.k} {state.t:.17g} {n} {x:.17g} {u.real:.17g} {u.imag:.17g} {abs(u):.17g}"
            )
    return "\n".join(lines) + "\n"


def cmd_dump_field(cfg: RunConfig, out=sys.stdout) -> int:
    q, K = cfg.q[0], cfg.K[0]
    grid = build_grid(q, cfg.N)
    config = EvolutionConfig(q=q, N=cfg.N, K=K, k0=cfg.k0)
    U0 = initial_field(_data(cfg), grid, time_level(q, cfg.k0))
    status = EXIT_OK
    try:
        trajectory = evolve(config, U0)
    except DivergenceError as exc:
        trajectory = exc.trajectory
        print(f"diverged: {exc}; dumping {len(trajectory)} finite level(s)", file=out)
        status = EXIT_DIVERGED
    atomic_write(cfg.out, field_dump(trajectory, grid))
    print(f"wrote {cfg.out} ({len(trajectory) * grid.size} rows)", file=out)
    return status


def probe_summary(cfg: RunConfig) -> dict:
    q, K, N = cfg.q[0], cfg.K[0], cfg.N
    cfl = cfl_diagnostic(q, N, K, k0=cfg.k0)
    margins = [dominance_check(assemble_matrix(q, N, k)).margin for k in cfl.ks]
    stab = analysis.stability_probe(
        EvolutionConfig(q=q, N=N, K=K, k0=cfg.k0), cfg.eta, cfg.trials, cfg.seed, cfg.ceiling
    )
    n_worst, k_worst, s_worst = cfl.worst
    return {
        "q": q,
        "N": N,
        "K": K,
        "k0": cfg.k0,
        "cfl": {
            "full_grid_satisfied": cfl.satisfied_anywhere,
            "first_full_k": cfl.first_full_k,
            "trusted_n": [int(v) for v in cfl.trusted_n],
            "max_sigma": [float(v) for v in cfl.max_sigma],
            "worst": {"n": n_worst, "k": k_worst, "abs_sigma": s_worst},
            "final_first_violation": cfl.first_violation(int(cfl.ks[-1])),
        },
        "dominance": {
            "passed": all(m > 0 for m in margins),
            "min_margin": min(margins),
            "max_margin": max(margins),
        },
        "stability": {
            "seed": cfg.seed,
            "trials": stab.trials,
            "eta": stab.eta,
            "ceiling": stab.ceiling,
            "max_observed": stab.max_observed if math.isfinite(stab.max_observed) else "inf",
            "diverged": stab.diverged,
            "passed": stab.passed,
        },
    }


def cmd_probe(cfg: RunConfig, out=sys.stdout) -> int:
    s = probe_summary(cfg)
    cfl, dom, stab = s["cfl"], s["dominance"], s["stability"]
    tag = lambda ok: "PASS" if ok else "FAIL"  # noqa: E731
    print(f"probe q={s['q']:.6g} N={s['N']} K={s['K']} k0={s['k0']}", file=out)
    first = cfl["first_full_k"]
    print(
        f"[{tag(cfl['full_grid_satisfied'])}] k >= 2n+1 on the full grid"
        + (f" from k={first}" if first is not None else " at no level of the run"),
        file=out,
    )
    w = cfl["worst"]
    print(f"       max |sigma| = {w['abs_sigma']:.3e} at n={w['n']}, k={w['k']}", file=out)
    print(f"[{tag(dom['passed'])}] diagonal dominance, margins in "
          f"[{dom['min_margin']:.15g}, {dom['max_margin']:.15g}]", file=out)
    mo = stab["max_observed"]
    mo_s = mo if isinstance(mo, str) else f"{mo:.3e}"
    print(f"[{tag(stab['passed'])}] boundedness: max sup-norm {mo_s} vs ceiling "
          f"{stab['ceiling']:g} over {stab['trials']} trials ({stab['diverged']} diverged)",
          file=out)
    atomic_write(cfg.out, json.dumps(s, indent=2, sort_keys=True) + "\n")
    print(f"wrote {cfg.out}", file=out)
    return EXIT_OK


def cmd_consistency(cfg: RunConfig, out=sys.stdout) -> int:
    q = cfg.q[0]
    line = diagonal_line(cfg.n_min, cfg.n_max)
    rep = analysis.consistency_study(_data(cfg), q, line)
    rows = [["n", "k", "l_plus_h", "abs_truncation"]]
    for (n, k), (scale, mag) in zip(line, rep.samples):
        rows.append([str(n), str(k), fmt(scale), fmt(mag)])
    atomic_write(cfg.out, _csv(rows))
    print(f"consistency along k = 2n+1, q={q:.6g}, n={cfg.n_min}..{cfg.n_max}: "
          f"fitted order {rep.fitted_order:.4f}", file=out)
    print(f"wrote {cfg.out}", file=out)
    return EXIT_OK


HANDLERS = {
    "single-soliton": cmd_run,
    "two-solitons": cmd_run,
    "table": cmd_table,
    "probe": cmd_probe,
    "consistency": cmd_consistency,
    "dump-field": cmd_dump_field,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 instead of argparse's 2
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qnls", description=__doc__.splitlines()[0], allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, allow_abbrev=False)
        p.add_argument("--config", metavar="FILE")
        for key in KEYS:
            p.add_argument(f"--{key}", dest=key, metavar="V")
        for key in SOLITON_KEYS:
            for suffix in ("", "1", "2"):
                p.add_argument(f"--{key}{suffix}", dest=f"{key}{suffix}", metavar="V")
    return parser


def main(argv: Optional[list[str]] = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = vars(build_parser().parse_args(argv))
        command, config_file = args.pop("command"), args.pop("config")
        cfg = parse_config(command, config_file, **args)
        return HANDLERS[command](cfg, out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

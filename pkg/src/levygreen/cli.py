"""Command-line front end: batch experiments with reproducible artifacts.

Subcommands: kernels | green | perturb | mc | kato | report.  Every output
file embeds the config hash and the toolkit version; rerunning a command
with the same config and seed reproduces the numeric content byte for byte
(single-threaded).  Exit codes: 0 success, 1 check failure, 2 config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, green, kernels, models, perturbation, svgplot
from . import kato as kato_mod
from . import montecarlo as mc_mod
from .geometry import C11Set


class ConfigError(Exception):
    pass


def _load_config(path: str) -> tuple[dict, str]:
    try:
        text = Path(path).read_text()
        cfg = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    digest = hashlib.sha256(
        json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()[:16]
    return cfg, digest


def _parse_domain(cfg: dict) -> C11Set:
    try:
        return C11Set(tuple(tuple(iv) for iv in cfg["domain"]["intervals"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad domain section: {exc}") from exc


def _parse_model(cfg: dict):
    try:
        return models.model_from_config(cfg["model"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad model section: {exc}") from exc


def _parse_drift(cfg: dict):
    try:
        return kato_mod.drift_from_config(cfg.get("drift", {"family": "zero"}))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad drift section: {exc}") from exc


def _meta(digest: str, **extra) -> dict:
    return {"config_sha256": digest, "version": __version__, **extra}


def _json_default(obj):
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True,
                               default=_json_default) + "\n")


def _csv_header(fh, digest: str, **extra) -> None:
    fh.write(f"# config_sha256={digest}\n# version={__version__}\n")
    for k, v in extra.items():
        fh.write(f"# {k}={v}\n")


def _green_for(cfg, model, domain, n_nodes):
    if model.alpha is None:
        raise ConfigError("Green-function commands need a stable-family model")
    if len(domain.intervals) == 1:
        return green.stable_oracle(model.alpha, domain)
    return green.numeric_table_green(model.alpha, domain,
                                     nodes_per_component=max(n_nodes, 120))


def cmd_kernels(cfg: dict, digest: str, out: Path, args) -> int:
    model = _parse_model(cfg)
    domain = _parse_domain(cfg)
    ppd = args.grid or cfg.get("grid", {}).get("points_per_decade", 64)
    table = kernels.build_table(model, diam=domain.diam, points_per_decade=ppd)
    table.export_csv(out / "kernels.csv",
                     header_lines=(f"config_sha256={digest}", f"version={__version__}",
                                   f"model={json.dumps(model.describe())}"))
    rep = kernels.check_table_invariants(table)
    _write_json(out / "kernel_invariants.json", {**_meta(digest), "checks": rep})
    svgplot.line_plot(out / "kernels.svg", table.r,
                      {"h": table.h, "V": table.V, "M": table.M, "K": table.K},
                      title="kernel hierarchy", logx=True, logy=True)
    print(f"kernel table: {len(table.r)} points, invariants "
          f"{'pass' if rep['all_pass'] else 'FAIL'}")
    return 0 if rep["all_pass"] else 1


def cmd_green(cfg: dict, digest: str, out: Path, args) -> int:
    model = _parse_model(cfg)
    domain = _parse_domain(cfg)
    n = args.grid or cfg.get("grid", {}).get("checker_grid", 100)
    table = kernels.build_table(model, diam=domain.diam, points_per_decade=32)
    G = _green_for(cfg, model, domain, 160)
    seed = args.seed if args.seed is not None else cfg.get("mc", {}).get("seed", 0)

    records = []
    grad = green.check_gradient_bound(G, table, n=n)
    records.append({"check": "gradient_bound", "n": n, "sup": grad["sup"],
                    "inf": None, "grid": n})
    tri = green.three_g_constant(G, table, n_triples=cfg.get("grid", {}).get(
        "three_g_triples", 20000), seed=seed)
    records.append({"check": "three_g", "n": tri.n, "sup": tri.sup, "inf": None,
                    "grid": None})
    x0 = cfg.get("source", 0.5 * sum(domain.intervals[0]))
    mass = green.poisson_mass(G, x0)
    records.append({"check": "poisson_mass", "n": None, "sup": mass, "inf": mass,
                    "grid": None})
    env = green.check_poisson_envelope(G, table, n_samples=200, seed=seed)
    records.append({"check": "poisson_envelope", "n": env["n"], "sup": env["sup"],
                    "inf": env["inf"], "grid": None})
    payload = {**_meta(digest, domain=domain.intervals, model=model.describe()),
               "records": records}
    _write_json(out / "green_checks.json", payload)
    ok = (np.isfinite(grad["sup"]) and np.isfinite(tri.sup)
          and abs(mass - 1.0) <= 1e-3 and env["finite"])
    for r in records:
        print(f"{r['check']}: sup={r['sup']:.6g}")
    return 0 if ok else 1


def cmd_perturb(cfg: dict, digest: str, out: Path, args) -> int:
    model = _parse_model(cfg)
    domain = _parse_domain(cfg)
    drift = _parse_drift(cfg)
    n = args.grid or cfg.get("grid", {}).get("nodes_per_component", 200)
    G = _green_for(cfg, model, domain, n)
    grid = perturbation.build_grid(domain, n, model.alpha)
    pg = perturbation.solve_perturbed(G, drift, grid,
                                      mode=cfg.get("mode", "direct"))
    rep = perturbation.comparability_report(pg)
    _write_json(out / "comparability.json",
                {**_meta(digest, domain=domain.intervals, model=model.describe(),
                         drift=drift.describe()), "report": rep.to_dict()})
    with open(out / "ratios.csv", "w") as fh:
        _csv_header(fh, digest, drift=drift.label)
        fh.write("x,y,G,Gt,ratio\n")
        r = pg.ratios()
        for i in range(grid.n):
            for j in range(grid.n):
                fh.write(f"{float(grid.nodes[i])!r},{float(grid.nodes[j])!r},"
                         f"{float(pg.unperturbed[i, j])!r},{float(pg.matrix[i, j])!r},{float(r[i, j])!r}\n")
    svgplot.heatmap(out / "ratio_heatmap.svg", pg.ratios(),
                    title=f"perturbed/unperturbed ratio (C={rep.constant:.4g})")
    print(f"comparability constant C = {rep.constant:.6g} "
          f"(ratios in [{rep.inf:.4g}, {rep.sup:.4g}], kappa={rep.kappa_disc:.4g})")
    return 0 if np.isfinite(rep.constant) else 1


def cmd_mc(cfg: dict, digest: str, out: Path, args) -> int:
    model = _parse_model(cfg)
    domain = _parse_domain(cfg)
    drift = _parse_drift(cfg)
    mcc = cfg.get("mc", {})
    seed = args.seed if args.seed is not None else mcc.get("seed", 0)
    config = mc_mod.PathConfig(
        dt=mcc.get("dt", 1e-3), n_paths=mcc.get("paths", 10_000), seed=seed,
        bin_width=mcc.get("bin_width", 0.05))
    x0 = cfg.get("source", 0.5 * sum(domain.intervals[0]))
    bins, val, se, sample = mc_mod.mc_green(model, drift, domain, x0, config)
    tau_mean = float(np.mean(sample.tau))
    tau_se = float(np.std(sample.tau, ddof=1) / np.sqrt(sample.n_paths))
    with open(out / "mc_green.csv", "w") as fh:
        _csv_header(fh, digest, seed=seed, dt=config.dt, paths=config.n_paths,
                    model=json.dumps(model.describe()), domain=json.dumps(domain.intervals),
                    drift=drift.label, source=x0)
        fh.write("center,width,value,se\n")
        for c, w, v, s in zip(bins.centers, bins.widths, val, se):
            fh.write(f"{float(c)!r},{float(w)!r},{float(v)!r},{float(s)!r}\n")
    counts, edges = np.histogram(sample.exit_pos, bins=80,
                                 range=(domain.intervals[0][0] - 2 * domain.diam,
                                        domain.intervals[-1][1] + 2 * domain.diam))
    with open(out / "mc_exit_law.csv", "w") as fh:
        _csv_header(fh, digest, seed=seed, dt=config.dt, paths=config.n_paths,
                    model=json.dumps(model.describe()),
                    domain=json.dumps(domain.intervals), drift=drift.label, source=x0)
        fh.write("left_edge,right_edge,count\n")
        for k in range(len(counts)):
            fh.write(f"{float(edges[k])!r},{float(edges[k + 1])!r},{int(counts[k])}\n")
    _write_json(out / "mc_estimates.json",
                {**_meta(digest, seed=seed, dt=config.dt, paths=config.n_paths),
                 "mean_exit_time": {"value": tau_mean, "se": tau_se},
                 "censored": sample.censored,
                 "occupation_total": float(np.sum(val * bins.widths))})
    svgplot.histogram(out / "mc_exit_law.svg", edges, counts, title="exit-position law")
    print(f"mean exit time {tau_mean:.6g} +- {tau_se:.2g} "
          f"({sample.censored} censored)")
    return 0


def cmd_kato(cfg: dict, digest: str, out: Path, args) -> int:
    model = _parse_model(cfg)
    domain = _parse_domain(cfg)
    drift = _parse_drift(cfg)
    table = kernels.build_table(model, diam=domain.diam, points_per_decade=32)
    tol = cfg.get("tolerances", {}).get("kato", 4.0)
    cert = kato_mod.is_kato(drift, table, tol=tol)
    _write_json(out / "kato_certificate.json", {**_meta(digest), **cert.to_dict()})
    print(f"kato certificate: {'PASS' if cert.passed else 'FAIL'} "
          f"(moduli {', '.join(f'{m:.3g}' for m in cert.moduli)})")
    return 0 if cert.passed else 1


def cmd_report(cfg: dict, digest: str, out: Path, args) -> int:
    """Run the full check battery for the configured scenario and summarize."""
    model = _parse_model(cfg)
    domain = _parse_domain(cfg)
    drift = _parse_drift(cfg)
    n = args.grid or cfg.get("grid", {}).get("nodes_per_component", 160)
    lines: list[tuple[str, bool, str]] = []

    table = kernels.build_table(model, diam=domain.diam, points_per_decade=32)
    inv = kernels.check_table_invariants(table)
    lines.append(("kernel invariants", inv["all_pass"], ""))

    G = _green_for(cfg, model, domain, n)
    x0 = cfg.get("source", 0.5 * sum(domain.intervals[0]))
    mass = green.poisson_mass(G, x0)
    lines.append(("exit-density mass = 1 +- 1e-3", abs(mass - 1.0) <= 1e-3,
                  f"mass={mass:.6f}"))

    grid = perturbation.build_grid(domain, n, model.alpha)
    pg = perturbation.solve_perturbed(G, drift, grid)
    rep = perturbation.comparability_report(pg)
    lines.append(("comparability constant finite", np.isfinite(rep.constant),
                  f"C={rep.constant:.4g}"))
    if rep.kappa_disc < 1.0 / 3.0:
        small_ok = rep.inf >= 0.5 + 1e-3 and rep.sup <= 1.5 - 1e-3
        lines.append(("small-domain regime: C <= 2", small_ok,
                      f"ratios in [{rep.inf:.4f}, {rep.sup:.4f}]"))

    cert = kato_mod.is_kato(drift, table,
                            tol=cfg.get("tolerances", {}).get("kato", 4.0))
    lines.append(("drift in the admissible class", cert.passed, ""))

    summary = {**_meta(digest, domain=domain.intervals, model=model.describe(),
                       drift=drift.describe()),
               "checks": [{"name": nm, "passed": ok, "detail": d}
                          for nm, ok, d in lines]}
    _write_json(out / "summary.json", summary)
    for nm, ok, d in lines:
        print(f"{nm}: {'PASS' if ok else 'FAIL'}" + (f"  ({d})" if d else ""))
    return 0 if all(ok for _, ok, _ in lines) else 1


_COMMANDS = {
    "kernels": cmd_kernels,
    "green": cmd_green,
    "perturb": cmd_perturb,
    "mc": cmd_mc,
    "kato": cmd_kato,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="levygreen",
        description="Green functions of unimodal jump generators under gradient "
                    "perturbations: tables, checks, solves, and simulations.")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--grid", type=int, default=None, help="override the grid size")
    parser.add_argument("--threads", type=int, default=1,
                        help="reserved; the implementation is single-threaded")
    args = parser.parse_args(argv)

    try:
        cfg, digest = _load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, digest, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

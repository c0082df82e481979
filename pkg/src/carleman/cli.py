"""Command-line entry point.

    carleman analyze   --config run.cfg
    carleman construct --config run.cfg --out results/
    carleman verify    --config run.cfg
    carleman wavelet   --config run.cfg

Exit status: 0 success, 1 pipeline failure or failed verification,
2 usage error, 3 configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import load_config
from .errors import CarlemanError, ConfigError
from .pipeline import Timer, analyze, construct, verify
from .wavelet import MotherWavelet, order_bound


EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONFIG = 0, 1, 2, 3


def build_parser():
    p = argparse.ArgumentParser(prog="carleman", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("analyze", "decay profile and e-selection"),
                       ("construct", "full pipeline, kernel CSV and sidecar per r"),
                       ("verify", "construct, then run the verification suite"),
                       ("wavelet", "tables of the mother wavelet and its derivatives")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=True, type=Path, help="run configuration (INI)")
        s.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
        s.add_argument("--grid-extent", type=float)
        s.add_argument("--grid-step", type=float)
        s.add_argument("--orders", type=int, help="derivative budget I_max")
        s.add_argument("--seed", type=int)
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def _out_dir(args, cfg):
    out = args.out if args.out is not None else Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_analyze(cfg, out):
    an = analyze(cfg)
    path = io.write_json(out / "analysis.json", {"config": cfg.to_dict(), **an.to_dict()})
    io.write_manifest(out, [(path, {"kind": "analysis"})], {"command": "analyze"})
    sel = an.selection
    print(f"e-selection: K_e={sel.K_e}, indices {[i + 1 for i in sel.indices]}")
    return EXIT_OK


def _write_construction(con, out):
    cfg = con.config
    st = con.structure
    entries = []
    entries.append((io.write_json(out / "analysis.json",
                                  {"config": cfg.to_dict(), **st.analysis.to_dict()}),
                    {"kind": "analysis"}))
    entries.append((io.write_json(out / "structure.json", st.to_dict()), {"kind": "structure"}))
    for r, K in enumerate(con.kernels, 1):
        csv = io.write_kernel_csv(out / f"kernel_r{r}.csv", K)
        side = io.write_json(out / f"kernel_r{r}.json", {
            "r": r, "b_scale_factor": r, "grid": K.grid.to_dict(),
            "orders": [list(o) for o in K.orders], "kernel_of": f"S_{r} = B_{r} / {r}",
            "provenance": {"P": K.parts["P"].provenance, "F": K.parts["F"].provenance}})
        prof = io.write_profile_csv(out / f"carleman_r{r}.csv", K.grid.points,
                                    con.carleman[r - 1], "norm_d")
        meta = {"r": r, "b_scale_factor": r}
        entries += [(csv, {"kind": "kernel", **meta}), (side, {"kind": "sidecar", **meta}),
                    (prof, {"kind": "carleman", **meta})]
    return entries


def run_construct(cfg, out, with_verify=False):
    timer = Timer()
    con = construct(cfg, timer)
    entries = _write_construction(con, out)
    status = EXIT_OK
    if with_verify:
        rep = verify(con)
        entries.append((io.write_json(out / "verification.json", rep.to_dict()),
                        {"kind": "verification"}))
        for c in sorted(rep.checks, key=lambda c: c.name):
            print(c.message)
        print(f"verdict: {'pass' if rep.verdict else 'fail'}")
        status = EXIT_OK if rep.verdict else EXIT_FAIL
    io.write_manifest(out, entries, {"command": "verify" if with_verify else "construct",
                                     "R": con.structure.analysis.family.R})
    # wall-clock data is the one non-reproducible output, so it stays out of the manifest
    io.write_json(out / "timings.json", {k: round(v, 3) for k, v in timer.spans.items()})
    print(f"wrote {len(entries)} files to {out}")
    return status


def run_wavelet(cfg, out):
    mother = MotherWavelet(quadrature_nodes=cfg.quadrature_nodes, i_max=cfg.orders)
    n = int(round(cfg.extent / cfg.step))
    s = cfg.step * np.arange(-n, n + 1)
    header, cols = ["s"], [s]
    for i in range(cfg.orders + 1):
        v = mother.eval(s, i)
        tag = "u" if i == 0 else f"u^({i})"
        header += [f"Re {tag}", f"Im {tag}", f"|{tag}|"]
        cols += [v.real, v.imag, np.abs(v)]
    csv = io.write_table(out / "wavelet.csv", header, cols)
    summary = io.write_json(out / "wavelet.json", {
        "quadrature_nodes": cfg.quadrature_nodes,
        "sup_norms": {str(i): mother.sup_norm(i) for i in range(cfg.orders + 1)},
        "order_bounds_A": {str(i): order_bound(mother, i) for i in range(cfg.orders + 1)},
        "bound_rule": "|u_jk^(i)|_C <= D_j A_i, D_j = 2^(j^2) (j > 0), 2^(j/2) (j <= 0)"})
    io.write_manifest(out, [(csv, {"kind": "wavelet"}), (summary, {"kind": "wavelet"})],
                      {"command": "wavelet"})
    print(f"sup-norms: {[round(mother.sup_norm(i), 6) for i in range(cfg.orders + 1)]}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config).with_overrides(
            extent=args.grid_extent, step=args.grid_step, orders=args.orders, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args, cfg)
    try:
        if args.command == "analyze":
            return run_analyze(cfg, out)
        if args.command == "wavelet":
            return run_wavelet(cfg, out)
        return run_construct(cfg, out, with_verify=args.command == "verify")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CarlemanError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

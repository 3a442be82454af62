"""Command-line front end.

Subcommands: gen, solve, certify, oracle, export.  Exit codes: 0 success,
1 usage error, 2 I/O error, 3 internal invariant violation (a produced
packing failed validation or a certificate inequality broke, which is a
bug trap rather than a user error).
"""

from __future__ import annotations

import argparse
import glob as globmod
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import aptas as aptas_mod
from . import export as export_mod
from . import generators, ssp
from .errors import (BudgetExceededError, ContractError, DomainError,
                     SegpackError, StructureError)
from .model import (Instance, as_fraction, instance_from_json,
                    instance_to_json, packing_from_json, packing_to_json,
                    total_volume, validate_packing)
from .oracle import SearchBudget, exact_strip_opt

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INVARIANT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(SegpackError):
    pass


def _read_instance(path: str) -> Instance:
    try:
        return instance_from_json(Path(path).read_text())
    except OSError as exc:
        raise _IoError(f"cannot read {path}: {exc}") from exc


class _IoError(SegpackError):
    pass


def _write(path: str, text: str):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise _IoError(f"cannot write {path}: {exc}") from exc


def _ssp_config(args) -> ssp.SspConfig:
    return ssp.SspConfig(k=args.k, c=as_fraction(args.c),
                         epsilon=as_fraction(args.epsilon),
                         backend=args.backend)


def _solve_one(args, path: str, out_path: str | None) -> dict:
    instance = _read_instance(path)
    if args.algorithm == "3ssp":
        result = ssp.run_3ssp(instance, _ssp_config(args))
        packing, cert = result.packing, result.certificate
    elif args.algorithm == "square-aptas":
        res = aptas_mod.run_square_aptas(instance, as_fraction(args.epsilon))
        packing, cert = res.packing, None
    else:  # mnfdh
        placements, leftover = aptas_mod.mnfdh_pack(
            list(instance.boxes), (Fraction(1), Fraction(1), None))
        if leftover:
            raise ContractError("unbounded region must take every box")
        from .model import Packing
        packing = Packing.of(instance, placements)
        cert = None
    report = validate_packing(instance, packing)
    if not report.ok:
        detail = "; ".join(v.message for v in report.violations[:5])
        raise ContractError(f"produced packing failed validation: {detail}")
    if out_path:
        _write(out_path, packing_to_json(packing))
    summary = {"instance": path, "height": float(packing.height),
               "boxes": len(instance)}
    if cert is not None:
        summary["certificate"] = cert.to_json_dict()
    if args.algorithm == "square-aptas":
        summary["report"] = res.report
    return summary


def _cmd_solve(args) -> int:
    paths = _expand_paths(args)
    outs = _out_paths(args, paths)
    results = _map_maybe_parallel(args, paths, outs)
    for summary in results:
        print(f"{summary['instance']}: height {summary['height']:g} "
              f"({summary['boxes']} boxes)")
    return EXIT_OK


def _solve_star(payload):
    args, path, out = payload
    return _solve_one(args, path, out)


def _map_maybe_parallel(args, paths, outs):
    if len(paths) > 1 and args.jobs != 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            return list(pool.map(_solve_star,
                                 [(args, p, o) for p, o in zip(paths, outs)]))
    return [_solve_one(args, p, o) for p, o in zip(paths, outs)]


def _expand_paths(args) -> list[str]:
    if getattr(args, "glob", None):
        paths = sorted(globmod.glob(args.glob))
        if not paths:
            raise _IoError(f"glob {args.glob!r} matched no files")
        return paths
    if not args.instance:
        raise _UsageError("need --instance or --glob")
    return [args.instance]


def _out_paths(args, paths) -> list[str | None]:
    if not args.out:
        return [None] * len(paths)
    if len(paths) == 1:
        return [args.out]
    return [str(Path(args.out) / (Path(p).stem + ".packing.json"))
            for p in paths]


def _cmd_certify(args) -> int:
    paths = _expand_paths(args)
    outs = _out_paths(args, paths)
    code = EXIT_OK
    for path, out in zip(paths, outs):
        instance = _read_instance(path)
        result = ssp.run_3ssp(instance, _ssp_config(args))
        report = validate_packing(instance, result.packing)
        if not report.ok:
            raise ContractError("produced packing failed validation")
        cert = result.certificate
        lb = cert.lower_bound
        ratio = float(cert.height / lb) if lb > 0 else float("nan")
        print(f"{path}:")
        print(f"  height          {float(cert.height):g}")
        print(f"  lb_volume       {float(cert.lb_volume):g}")
        print(f"  lb_modified     {float(cert.lb_modified):g}")
        print(f"  achieved ratio  {ratio:g}")
        print(f"  slack           {float(cert.slack):g}")
        meta_opt = instance.meta.get("opt_height")
        if meta_opt is not None:
            opt = as_fraction(meta_opt)
            print(f"  known opt       {float(opt):g} "
                  f"(ratio {float(cert.height / opt):g})")
        if cert.parametric:
            row = cert.parametric
            print(f"  parametric      alpha={row['alpha']:g} in "
                  f"{row['bucket']}: ratio {row['asymptotic_ratio']}")
        if cert.slack <= 0 or (lb > 0 and cert.lb_modified > cert.height):
            code = EXIT_INVARIANT
        if out:
            doc = cert.to_json_dict()
            doc["packing"] = json.loads(packing_to_json(result.packing))
            _write(out, json.dumps(doc, indent=2))
    return code


def _cmd_oracle(args) -> int:
    instance = _read_instance(args.instance)
    budget = SearchBudget(max_nodes=args.budget_nodes,
                          max_boxes=args.max_boxes)
    opt, witness = exact_strip_opt(instance, budget)
    report = validate_packing(instance, witness)
    if not report.ok:
        raise ContractError("oracle witness failed validation")
    print(f"{args.instance}: optimal height {opt} (= {float(opt):g})")
    if args.out:
        _write(args.out, packing_to_json(witness))
    return EXIT_OK


def _cmd_gen(args) -> int:
    params = {}
    if args.generator == "guillotine-cut":
        params = {"height": args.height, "cuts": args.cuts}
    else:
        params = {"n": args.n}
        if args.lo is not None:
            params["lo"] = args.lo
        if args.hi is not None:
            params["hi"] = args.hi
        if args.generator == "harmonic-adversarial":
            params["k"] = args.k
    instance = generators.gen_instance(args.generator, args.seed, **params)
    text = instance_to_json(instance)
    if args.out:
        _write(args.out, text)
        print(f"wrote {len(instance)} boxes to {args.out}")
    else:
        print(text)
    return EXIT_OK


def _cmd_export(args) -> int:
    instance = _read_instance(args.instance)
    try:
        packing = packing_from_json(Path(args.packing).read_text())
    except OSError as exc:
        raise _IoError(f"cannot read {args.packing}: {exc}") from exc
    report = validate_packing(instance, packing)
    if not report.ok:
        raise ContractError("packing to export failed validation")
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _IoError(f"cannot create {out_dir}: {exc}") from exc
    wrote = []
    if args.format in ("svg", "all"):
        for idx, text in export_mod.svg_layers(instance, packing,
                                               as_fraction(args.layer_height)):
            path = out_dir / f"layer{idx:03d}.svg"
            _write(str(path), text)
            wrote.append(path.name)
    if args.format in ("obj", "all"):
        path = out_dir / "packing.obj"
        _write(str(path), export_mod.obj_export(instance, packing))
        wrote.append(path.name)
    print(f"wrote {', '.join(wrote)} to {out_dir}")
    return EXIT_OK


def _add_solver_flags(p: _Parser):
    p.add_argument("--instance", help="instance JSON path")
    p.add_argument("--glob", help="process every matching instance file")
    p.add_argument("--jobs", type=int, default=None,
                   help="parallel workers for --glob (default: cpu count)")
    p.add_argument("--k", type=int, default=12, help="number of length classes")
    p.add_argument("--c", default="16", help="segment height (rational > 1)")
    p.add_argument("--epsilon", default="1/10", help="1D packing accuracy")
    p.add_argument("--backend", choices=["ffd", "aptas"], default="ffd",
                   help="1D packer for segment widths")
    p.add_argument("--out", help="output path (file, or directory for --glob)")


def build_parser() -> _Parser:
    parser = _Parser(prog="segpack",
                     description="3D strip packing with certified bounds")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="pack an instance and write the packing")
    _add_solver_flags(p)
    p.add_argument("--algorithm", choices=["3ssp", "square-aptas", "mnfdh"],
                   default="3ssp")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("certify",
                       help="pack and print lower bounds and slack")
    _add_solver_flags(p)
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("oracle", help="exact optimum for a tiny instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", help="write the witness packing JSON here")
    p.add_argument("--budget-nodes", type=int, default=2_000_000)
    p.add_argument("--max-boxes", type=int, default=5)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("gen", help="generate a seeded instance")
    p.add_argument("--generator", required=True,
                   choices=sorted(generators.GENERATORS))
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lo", help="smallest size on the grid")
    p.add_argument("--hi", help="largest size on the grid")
    p.add_argument("--k", type=int, default=12)
    p.add_argument("--height", type=int, default=3,
                   help="guillotine-cut: exact optimal height")
    p.add_argument("--cuts", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("export", help="SVG floor plans and OBJ mesh")
    p.add_argument("--instance", required=True)
    p.add_argument("--packing", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--format", choices=["svg", "obj", "all"], default="all")
    p.add_argument("--layer-height", default="16",
                   help="z-extent of one floor-plan layer")
    p.set_defaults(func=_cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceededError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (_IoError, StructureError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ContractError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())

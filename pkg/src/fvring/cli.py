"""Command-line front end: quench time series, (h, g) sweeps, overlap
spectra, closed-form effective-model output, and bubble-state predictions.

Every data file starts with a provenance header (tool version, resolved model
spec, command options); the spec line can be fed back as a config file to
reproduce the run. Exit codes: 0 success, 2 usage error, 3 numerical failure,
4 resource cap.
"""

import argparse
import contextlib
import json
import sys

import numpy as np

from . import __version__, analytics, effective, spectra, states
from .dynamics import TimeGrid, quench_series
from .errors import FvringError, NotTwoLevelError, ResourceLimitError
from .model import DisorderSpec, Interaction, ModelSpec, build_hamiltonian
from .scan import (
    Axis,
    EnsembleSpec,
    MinReturnMetric,
    ScanGrid,
    SubLeadingMetric,
    disorder_ensemble,
    grid_scan,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_RESOURCE = 4


def _fmt(x):
    if isinstance(x, float) and np.isnan(x):
        return ""
    return f"{x:.12g}"


def _load_config(path):
    """Read a model spec from a JSON file, or from the '# spec:' provenance
    line of a previously written data file."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    for line in text.splitlines():
        if line.startswith("# spec: "):
            return json.loads(line[len("# spec: "):])
    raise ValueError(f"{path} is neither a JSON spec nor a provenance-headed file")


def _add_model_args(p, with_fields=True):
    p.add_argument("--config", help="model spec JSON file (flags override fields)")
    p.add_argument("--L", type=int)
    p.add_argument("--J", type=float)
    if with_fields:
        p.add_argument("--g", type=float)
        p.add_argument("--h", type=float)
    p.add_argument("--interaction", choices=["nn", "power_law", "squeeze"])
    p.add_argument("--exponent", type=float, help="power-law exponent (default 3)")
    p.add_argument("--beta", type=float, help="squeezing strength")
    p.add_argument("--sigma", type=float, help="bond-disorder standard deviation")
    p.add_argument("--seed", type=int, help="disorder stream seed")
    p.add_argument("--realization", type=int, default=None, help="disorder realization index")


def _resolve_spec(args, require_h=True):
    doc = _load_config(args.config) if args.config else {}
    for key in ("L", "J", "g", "h"):
        flag = getattr(args, key, None)
        if flag is not None:
            doc[key] = flag
    if args.interaction is not None:
        inter = {"kind": args.interaction}
        if args.interaction == "power_law":
            inter["exponent"] = args.exponent if args.exponent is not None else 3.0
        if args.interaction == "squeeze":
            if args.beta is None:
                raise ValueError("--interaction squeeze requires --beta")
            inter["beta"] = args.beta
        doc["interaction"] = inter
    if args.sigma is not None:
        if args.seed is None:
            raise ValueError("--sigma requires --seed")
        doc["disorder"] = {
            "sigma": args.sigma,
            "seed": args.seed,
            "realization": args.realization or 0,
        }
    doc.setdefault("J", 1.0)
    required = ("L", "g", "h") if require_h else ("L",)
    missing = [k for k in required if k not in doc]
    if missing:
        raise ValueError(f"missing model parameters: {', '.join(missing)} "
                         "(set flags or provide --config)")
    doc.setdefault("g", 0.0)
    doc.setdefault("h", 0.0)
    return ModelSpec.from_json(doc)


def _open_out(path):
    if path:
        return open(path, "w")
    return contextlib.nullcontext(sys.stdout)


def _provenance(fh, spec, options):
    fh.write(f"# fvring {__version__}\n")
    fh.write(f"# spec: {json.dumps(spec.to_json(), sort_keys=True)}\n")
    fh.write(f"# options: {json.dumps(options, sort_keys=True)}\n")


def _parse_axis(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"axis must be min:max:steps, got {text!r}")
    return Axis(float(parts[0]), float(parts[1]), int(parts[2]))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_evolve(args):
    spec = _resolve_spec(args)
    grid = TimeGrid(args.tmax, args.dt) if args.tmax > 0 else None
    options = {
        "command": "evolve", "state": args.state, "tmax": args.tmax,
        "dt": args.dt, "tol": args.tol, "ensemble": args.ensemble,
    }
    if args.ensemble:
        if spec.disorder is None:
            raise ValueError("--ensemble requires --sigma and --seed")
        if grid is None:
            raise ValueError("--ensemble requires --tmax > 0")
        ens = EnsembleSpec(spec.disorder.sigma, args.ensemble, spec.disorder.seed)
        series = disorder_ensemble(
            spec, ens, grid, observables=("p_ret", "m"), tol=args.tol, jobs=args.jobs
        )
        with _open_out(args.out) as fh:
            _provenance(fh, spec, options)
            fh.write("t,p_ret,p_ret_stderr,m,m_stderr\n")
            for i, t in enumerate(series.times):
                row = [t, series.mean["p_ret"][i], series.stderr["p_ret"][i],
                       series.mean["m"][i], series.stderr["m"][i]]
                fh.write(",".join(_fmt(x) for x in row) + "\n")
            if series.failures:
                fh.write(f"# failed realizations: {len(series.failures)}\n")
        return EXIT_OK

    psi0 = states.state_from_name(args.state, spec)
    H = build_hamiltonian(spec)
    nzz = spec.L // 2
    header = "t,re_g,im_g,p_ret,m," + ",".join(f"C{r}" for r in range(1, nzz + 1))
    with _open_out(args.out) as fh:
        _provenance(fh, spec, options)
        fh.write(header + "\n")
        if grid is None:
            w = np.abs(psi0) ** 2
            from . import kernels

            z = kernels.site_z_expectations(w, spec.L)
            zz = kernels.zz_correlators(w, spec.L)
            row = [0.0, 1.0, 0.0, 1.0, float(z.mean())] + list(zz)
            fh.write(",".join(_fmt(x) for x in row) + "\n")
            return EXIT_OK
        series = quench_series(H, psi0, grid, tol=args.tol, observables=("m", "zz"))
        g_vals = series.values["g"]
        for i, t in enumerate(series.times):
            row = [t, g_vals[i].real, g_vals[i].imag,
                   series.values["p_ret"][i], series.values["m"][i]]
            row += list(series.values["zz"][i])
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    return EXIT_OK


def _write_scan(result, spec, options, out):
    with _open_out(out) as fh:
        _provenance(fh, spec, options)
        fh.write("h,g,L,metric_name,value,p1,p2,status,seconds\n")
        for pt in result.points:
            row = [_fmt(pt.h), _fmt(pt.g), str(spec.L), result.grid.metric.name,
                   _fmt(pt.value), _fmt(pt.p1), _fmt(pt.p2), pt.status,
                   f"{pt.seconds:.3f}"]
            fh.write(",".join(row) + "\n")
    if out:
        with open(out + ".grid.json", "w") as fh:
            json.dump(result.grid.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _scan_common(args, reference):
    spec = _resolve_spec(args, require_h=False)
    h_axis = _parse_axis(args.h_axis)
    g_axis = _parse_axis(args.g_axis)
    if args.metric == "minret":
        metric = MinReturnMetric(window=args.window, dt=args.dt)
    else:
        metric = SubLeadingMetric(method=args.method, t_max=args.tmax)
    grid = ScanGrid(spec=spec, h_axis=h_axis, g_axis=g_axis, metric=metric,
                    reference=reference)
    result = grid_scan(grid, jobs=args.jobs)
    options = {
        "command": "orbital" if reference else "scan",
        "h": args.h_axis, "g": args.g_axis, "metric": args.metric,
        "method": args.method, "window": args.window, "dt": args.dt,
        "tmax": args.tmax,
        "reference": [list(s) for s in reference] if reference else None,
    }
    _write_scan(result, spec, options, args.out)
    return EXIT_OK


def _cmd_scan(args):
    return _scan_common(args, None)


def _cmd_orbital(args):
    if args.reference == "fv":
        return _scan_common(args, None)
    reference = states.parse_pattern(args.reference.removeprefix("pattern:"))
    return _scan_common(args, reference)


def _cmd_spectrum(args):
    spec = _resolve_spec(args)
    psi0 = states.state_from_name(args.state, spec)
    H = build_hamiltonian(spec)
    if args.method == "dense":
        spectrum = spectra.overlap_spectrum(psi0, spectra.eigen_decompose(H))
    else:
        spectrum = spectra.spectral_weights_fft(H, psi0, t_max=args.tmax, dt=args.dt)
    options = {"command": "spectrum", "state": args.state, "method": args.method,
               "tmax": args.tmax, "dt": args.dt}
    with _open_out(args.out) as fh:
        _provenance(fh, spec, options)
        fh.write("rank,energy,weight\n")
        for rank, (e, w) in enumerate(spectrum.entries, start=1):
            if w < args.weight_floor and rank > 2:
                break
            fh.write(f"{rank},{_fmt(e)},{_fmt(w)}\n")
    try:
        fit = spectra.two_level_fit(spectrum)
        doc = json.dumps(fit.to_json(), indent=2, sort_keys=True)
        if args.fit_out:
            with open(args.fit_out, "w") as fh:
                fh.write(doc + "\n")
        elif args.out:
            print(doc)
    except NotTwoLevelError as exc:
        print(f"no two-level fit: {exc}", file=sys.stderr)
    return EXIT_OK


def _cmd_swt(args):
    two = effective.effective_two_level(args.L, args.h, args.g, legacy=args.legacy)
    doc = two.to_json()
    doc["kappa"] = effective.kappa(args.h)
    doc["period"] = effective.predicted_period(args.L, args.h, args.g,
                                               legacy=args.legacy)
    try:
        doc["resonant_h_star"] = effective.resonance_field(args.L, args.g)
    except (FvringError, ValueError):
        doc["resonant_h_star"] = None
    out = json.dumps(doc, indent=2, sort_keys=True)
    with _open_out(args.out) as fh:
        fh.write(out + "\n")
    return EXIT_OK


def _cmd_predict(args):
    doc = {
        "L": args.L,
        "n": args.n,
        "magnetization": float(analytics.predicted_magnetization(args.L, args.n)),
    }
    rs = [args.r] if args.r else list(range(1, args.L // 2 + 1))
    doc["correlators"] = [
        {
            "r": r,
            "pairs": analytics.opposite_pair_count(args.L, args.n, r),
            "value": float(analytics.predicted_correlator(args.L, args.n, r)),
        }
        for r in rs
    ]
    out = json.dumps(doc, indent=2, sort_keys=True)
    with _open_out(args.out) as fh:
        fh.write(out + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fvring",
        description="quench dynamics and two-state oscillations on Ising rings",
    )
    parser.add_argument("--version", action="version", version=f"fvring {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="time-evolve a state and write observables")
    _add_model_args(p)
    p.add_argument("--state", default="fv",
                   help="fv | all-up | pattern:<grammar> (default fv)")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--dt", type=float, default=0.5)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--ensemble", type=int, default=0,
                   help="average this many disorder realizations")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evolve)

    for name, help_text in (("scan", "sweep a metric over an (h, g) grid"),
                            ("orbital", "P_sub sweep against a pattern reference state")):
        p = sub.add_parser(name, help=help_text)
        _add_model_args(p, with_fields=False)
        p.add_argument("--h", dest="h_axis", required=True, metavar="MIN:MAX:STEPS")
        p.add_argument("--g", dest="g_axis", required=True, metavar="MIN:MAX:STEPS")
        p.add_argument("--metric", choices=["minret", "psub"],
                       default="psub" if name == "orbital" else "minret")
        p.add_argument("--method", choices=["dense", "fft"], default="dense")
        p.add_argument("--window", type=float, default=400.0)
        p.add_argument("--dt", type=float, default=0.25)
        p.add_argument("--tmax", type=float, default=None,
                       help="fft-path series length")
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--out")
        if name == "orbital":
            p.add_argument("--reference", required=True,
                           help="pattern:<grammar> reference state")
            p.set_defaults(func=_cmd_orbital)
        else:
            p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("spectrum", help="overlap spectrum of a reference state")
    _add_model_args(p)
    p.add_argument("--state", default="fv")
    p.add_argument("--method", choices=["dense", "fft"], default="dense")
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--weight-floor", type=float, default=1e-6)
    p.add_argument("--fit-out", help="write the two-level fit JSON here")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("swt", help="closed-form effective two-level model")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--legacy", action="store_true",
                   help="single-site model: no self-energy, no sqrt(L)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_swt)

    p = sub.add_parser("predict", help="bubble-state magnetization and correlators")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_predict)

    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"fvring: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except FvringError as exc:
        print(f"fvring: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"fvring: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

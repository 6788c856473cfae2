"""Command-line interface: densities, sum rates, Monte Carlo verification, figure data.

Every command writes CSV files (one header line, floats with 17 significant
digits) plus a JSON manifest recording the command line, resolved
configuration, seeds, library version, timestamps and output paths.
``linrx rerun MANIFEST`` replays a manifest.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import os
import sys

import click
import numpy as np

from . import __version__
from .ensembles import CorrelationSpec, EnsembleSpec, load_ensemble_json, normalization_alpha, normalization_alpha_mc
from .errors import ConfigError, InadmissibleParameters, LinrxError
from .monte_carlo import compare, draw_sinrs, dump_samples_csv
from .sinr_analytics import (
    CLOSED,
    Receiver,
    ReceiverConfig,
    auto_ratio_grid,
    density_curve,
    mmse_sumrate,
    zf_sumrate,
)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

FIG_ENSEMBLE = EnsembleSpec.gaussian(8, (5, 2, 2))
FIG1_DELTAS = "0.125,1,10"


# ---------------------------------------------------------------------------
# helpers


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _write_manifest(ctx, out_dir, stem, config, seeds, outputs, started):
    doc = {
        "command": ctx.command_path,
        "argv": ctx.find_root().obj.get("argv", []),
        "cwd": os.getcwd(),
        "config": config,
        "seeds": seeds,
        "version": __version__,
        "started": started,
        "finished": _now(),
        "outputs": [os.path.abspath(p) for p in outputs],
    }
    path = os.path.join(out_dir, f"{stem}.manifest.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return path


def _parse_list(text, field, conv=int):
    if text is None or text.strip() == "":
        return ()
    try:
        return tuple(conv(t) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"expected a comma-separated list, got {text!r}", field=field) from None


def _build_ensemble(ensemble_json, ensemble, nt, nu, mu):
    if ensemble_json is not None:
        with open(ensemble_json) as fh:
            return load_ensemble_json(fh.read())
    if ensemble is None or nt is None or nu is None:
        raise ConfigError("give --ensemble-json, or --ensemble with --nt and --nu", field="ensemble")
    doc = {"kind": ensemble, "n_t": nt, "nu": list(_parse_list(nu, "nu")), "mu": list(_parse_list(mu, "mu"))}
    return EnsembleSpec.from_dict(doc), CorrelationSpec.identity(nt)


def _check_receiver(receiver, corr):
    if receiver is Receiver.MMSE and not corr.is_identity:
        raise ConfigError(
            "the MMSE formulas cover uncorrelated transmitters only (Sigma_t = I); use the ZF receiver "
            "or the Monte Carlo oracle for correlated channels",
            field="sigma_t",
        )


def _alpha(spec, corr, seed):
    return normalization_alpha(spec, corr, seed=seed)


def _resolve_delta(spec, corr, delta, es, n0, seed):
    """``delta`` directly, or ``es * alpha / (n_t * n0)``; returns (delta, alpha or None)."""
    if (delta is None) == (es is None):
        raise ConfigError("give exactly one of --delta and --es", field="delta")
    if not n0 > 0:
        raise ConfigError("must be positive", field="n0")
    if delta is not None:
        return float(delta), None
    if es < 0:
        raise ConfigError("must be non-negative", field="es")
    alpha = _alpha(spec, corr, seed)
    return es * alpha / (spec.n_t * n0), alpha


def _db_grid(start, stop, step, field="es"):
    if not step > 0 or stop < start:
        raise ConfigError("need step > 0 and stop >= start", field=field)
    count = int(round((stop - start) / step)) + 1
    return start + step * np.arange(count)


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _ensemble_options(fn):
    opts = [
        click.option("--ensemble-json", type=click.Path(exists=True, dir_okay=False),
                     help="Ensemble JSON file {kind, n_t, M, nu, mu, sigma_t}."),
        click.option("--ensemble", type=click.Choice(["gaussian", "jacobi"]), help="Ensemble kind."),
        click.option("--nt", type=int, help="Number of transmit antennas n_t."),
        click.option("--nu", help="Comma-separated nu_1..nu_M."),
        click.option("--mu", help="Comma-separated mu_1..mu_M (Jacobi only)."),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def _power_options(fn):
    opts = [
        click.option("--delta", type=float, help="Effective power delta = E_s alpha / (n_t N_0)."),
        click.option("--es", type=float, help="Linear input power E_s (alpha derived from the ensemble)."),
        click.option("--n0", type=float, default=1.0, show_default=True, help="Noise power N_0."),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


_RECEIVER = click.Choice(["zf", "mmse"])


# ---------------------------------------------------------------------------
# commands


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="linrx")
def cli():
    """SINR densities and ergodic sum rates of ZF and MMSE receivers over product channels."""


@cli.command("pdf")
@_ensemble_options
@click.option("--receiver", type=_RECEIVER, required=True)
@_power_options
@click.option("--stream", "k", type=int, default=1, show_default=True, help="Stream index k (1-based).")
@click.option("--grid", default="auto", show_default=True, help="'auto' or 'min,max,points' on the gamma axis.")
@click.option("--points", type=int, default=600, show_default=True, help="Points of the auto grid.")
@click.option("--method", type=click.Choice(["auto", "specialized", "generic"]), default="auto", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for Monte Carlo alpha (Jacobi).")
@click.option("--out", "out_dir", default=".", show_default=True, help="Output directory.")
@click.option("--name", default="pdf", show_default=True, help="Output file stem.")
@click.pass_context
def cmd_pdf(ctx, ensemble_json, ensemble, nt, nu, mu, receiver, delta, es, n0, k, grid, points, method, seed,
            out_dir, name):
    """Tabulate the SINR density of stream k: CSV columns gamma, density, error_estimate."""
    started = _now()
    spec, corr = _build_ensemble(ensemble_json, ensemble, nt, nu, mu)
    rx = Receiver(receiver)
    _check_receiver(rx, corr)
    d, alpha = _resolve_delta(spec, corr, delta, es, n0, seed)
    if grid != "auto":
        parts = _parse_list(grid, "grid", float)
        if len(parts) != 3:
            raise ConfigError("expected 'auto' or 'min,max,points'", field="grid")
        lo, hi, count = parts
        if not (0 <= lo < hi and count >= 2):
            raise ConfigError("expected 0 <= min < max and points >= 2", field="grid")
        grid = (lo, hi, int(count))
    cfg = ReceiverConfig(rx, d, k, n_t=spec.n_t)
    curve = density_curve(spec, cfg, grid, points=points, method=method, corr=corr)
    _ensure_dir(out_dir)
    path = _write_csv(os.path.join(out_dir, f"{name}.csv"), ["gamma", "density", "error_estimate"],
                      zip(curve.gamma, curve.density, curve.error))
    config = {
        "ensemble": spec.to_dict(), "sigma_t": corr.to_list(), "receiver": rx.value, "delta": d, "es": es,
        "n0": n0, "alpha": alpha, "stream": k, "grid": grid, "points": points, "method": curve.method,
        "notes": curve.notes,
    }
    _write_manifest(ctx, out_dir, name, config, {"alpha": seed}, [path], started)
    click.echo(f"{path}: {curve.gamma.size} points, method {curve.method}, integral {curve.integral():.9f}")
    for note in curve.notes:
        click.echo(f"note: {note}")
    return EXIT_OK


@cli.command("sumrate")
@_ensemble_options
@click.option("--receiver", type=_RECEIVER, required=True)
@click.option("--es-start", type=float, default=0.0, show_default=True, help="First E_s in dB.")
@click.option("--es-stop", type=float, default=40.0, show_default=True, help="Last E_s in dB.")
@click.option("--es-step", type=float, default=5.0, show_default=True, help="E_s step in dB.")
@click.option("--n0", type=float, default=1.0, show_default=True)
@click.option("--bits", is_flag=True, help="Print rates in bits instead of nats.")
@click.option("--no-check", is_flag=True, help="Skip the cross-check between evaluation routes.")
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for Monte Carlo alpha (Jacobi).")
@click.option("--out", "out_dir", default=".", show_default=True)
@click.option("--name", default="sumrate", show_default=True)
@click.pass_context
def cmd_sumrate(ctx, ensemble_json, ensemble, nt, nu, mu, receiver, es_start, es_stop, es_step, n0, bits,
                no_check, seed, out_dir, name):
    """Ergodic sum rate over an E_s sweep (dB): one row per grid point and evaluation route."""
    started = _now()
    spec, corr = _build_ensemble(ensemble_json, ensemble, nt, nu, mu)
    rx = Receiver(receiver)
    _check_receiver(rx, corr)
    if not n0 > 0:
        raise ConfigError("must be positive", field="n0")
    alpha = _alpha(spec, corr, seed)
    rows, notes = [], []
    for db in _db_grid(es_start, es_stop, es_step):
        d = 10.0 ** (db / 10.0) * alpha / (spec.n_t * n0)
        if rx is Receiver.ZF:
            res = zf_sumrate(spec, d, corr.sigma_k, check=not no_check)
        else:
            res = mmse_sumrate(spec, d, corr=corr, check=not no_check)
        for method, r in res.items():
            rows.append((float(db), d, r.value, r.bits, method, r.error))
            notes.extend(f"es_db={db:g}: {n}" for n in r.notes)
            shown = r.bits if bits else r.value
            click.echo(f"{db:8.3f} dB  {shown:.12g} {'bits' if bits else 'nats'}  [{method}]")
    _ensure_dir(out_dir)
    path = _write_csv(os.path.join(out_dir, f"{name}.csv"),
                      ["es_db", "delta", "rate_nats", "rate_bits", "method", "error_estimate"], rows)
    config = {
        "ensemble": spec.to_dict(), "sigma_t": corr.to_list(), "receiver": rx.value, "alpha": alpha,
        "es_db": [es_start, es_stop, es_step], "n0": n0, "check": not no_check, "notes": notes,
    }
    _write_manifest(ctx, out_dir, name, config, {"alpha": seed}, [path], started)
    for n in notes:
        click.echo(f"note: {n}")
    return EXIT_OK


def _analytic_sumrate(spec, corr, rx, delta, closed_only=False):
    if rx is Receiver.ZF:
        res = zf_sumrate(spec, delta, corr.sigma_k, closed_only=closed_only)
    else:
        res = mmse_sumrate(spec, delta, corr=corr, closed_only=closed_only)
    return res.get(CLOSED) or next(iter(res.values()))


@cli.command("verify")
@_ensemble_options
@click.option("--receiver", type=_RECEIVER, required=True)
@_power_options
@click.option("--stream", "k", type=int, default=1, show_default=True)
@click.option("--samples", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--bins", default="fd", show_default=True, help="Histogram bins: integer >= 10 or 'fd'.")
@click.option("--inject-delta-mismatch", "mismatch", type=float, default=1.0, show_default=True,
              help="Draw samples at delta times this factor (negative control).")
@click.option("--dump-samples", type=click.Path(dir_okay=False), help="Write the sampled SINRs to this CSV.")
@click.option("--out", "out_dir", default=".", show_default=True)
@click.option("--name", default="verify", show_default=True)
@click.pass_context
def cmd_verify(ctx, ensemble_json, ensemble, nt, nu, mu, receiver, delta, es, n0, k, samples, seed, workers, bins,
               mismatch, dump_samples, out_dir, name):
    """Compare the analytic density and sum rate with Monte Carlo draws; exit 1 on failure."""
    started = _now()
    spec, corr = _build_ensemble(ensemble_json, ensemble, nt, nu, mu)
    rx = Receiver(receiver)
    _check_receiver(rx, corr)
    d, alpha = _resolve_delta(spec, corr, delta, es, n0, seed)
    if samples < 2:
        raise ConfigError("need at least 2 samples", field="samples")
    if not mismatch > 0:
        raise ConfigError("must be positive", field="inject-delta-mismatch")
    if bins != "fd":
        bins = _parse_list(bins, "bins")[0]
        if bins < 10:
            raise ConfigError("must be at least 10", field="bins")
    cfg = ReceiverConfig(rx, d, k, n_t=spec.n_t)
    curve = density_curve(spec, cfg, corr=corr)
    draws, rejected = draw_sinrs(spec, corr, [d * mismatch], samples, seed, (rx,), workers)
    per_stream = draws[rx][:, 0, :]
    report = compare(curve, per_stream[:, k - 1], bins=bins, seed=seed, allow_small=True)
    report.rejected = rejected
    if mismatch != 1.0:
        report.notes.append(f"samples drawn at delta*{mismatch:g} (deliberate mismatch)")
    per_draw = np.log1p(per_stream).sum(axis=1)
    analytic = _analytic_sumrate(spec, corr, rx, d)
    report.attach_sumrate(per_draw.mean(), per_draw.std(ddof=1) / math.sqrt(per_draw.size), analytic.value)
    _ensure_dir(out_dir)
    outputs = [os.path.join(out_dir, f"{name}.json")]
    with open(outputs[0], "w") as fh:
        fh.write(report.to_json() + "\n")
    if dump_samples:
        dump_samples_csv(dump_samples, per_stream[:, k - 1])
        outputs.append(dump_samples)
    config = {
        "ensemble": spec.to_dict(), "sigma_t": corr.to_list(), "receiver": rx.value, "delta": d, "es": es,
        "n0": n0, "alpha": alpha, "stream": k, "samples": samples, "workers": workers, "bins": bins,
        "inject_delta_mismatch": mismatch,
    }
    _write_manifest(ctx, out_dir, name, config, {"monte_carlo": seed, "alpha": seed}, outputs, started)
    click.echo(f"ks_distance {report.ks_distance:.6g} (threshold {report.ks_threshold:.4g}) "
               f"{'pass' if report.ks_pass else 'FAIL'}")
    click.echo(f"l1_distance {report.l1_distance:.6g} over {report.bins} bins")
    click.echo(f"sumrate empirical {report.sumrate_empirical:.9g} +- {report.sumrate_se:.3g}, "
               f"analytic {report.sumrate_analytic:.9g} {'pass' if report.sumrate_pass else 'FAIL'}")
    for note in report.notes:
        click.echo(f"note: {note}")
    if not report.passed:
        for f in report.failures:
            click.echo(f"verification failed: {f}", err=True)
        return EXIT_VERIFY
    return EXIT_OK


def _histogram(values, bins="fd"):
    edges = np.histogram_bin_edges(values, bins=bins)
    dens, edges = np.histogram(values, bins=edges, density=True)
    return edges, dens


_FIG1_README = """Figure 1 data: SINR densities of stream 1, Gaussian product channel
n_t = 8, M = 3, nu = (5, 2, 2), Sigma_t = I.

Horizontal axis: gamma/delta (SINR divided by the effective power delta).
Vertical axis: density of gamma/delta, i.e. delta * rho(gamma).

fig1_analytic_delta<d>.csv   gamma_over_delta, zf_density, zf_error, mmse_density, mmse_error
                             (one common gamma/delta grid for every delta)
fig1_mc_<receiver>_delta<d>.csv
                             bin_left, bin_right, density: Monte Carlo histogram of
                             gamma/delta (Freedman-Diaconis bins)
fig1_summary.json            KS and binned L1 distances per (delta, receiver), and the
                             L1 distance between the analytic ZF and MMSE densities

The ZF density on the gamma/delta axis does not depend on delta, so its
column is the same in every analytic file.  The default delta set is
{1/8, 1, 10}; only the near-coincidence of the ZF and MMSE curves at
delta = 10 is a documented property of this setup, the other two values
were chosen to show the low- and mid-power regimes.
"""

_FIG2_README = """Figure 2 data: ergodic sum rate versus input power, Gaussian product channel
n_t = 8, M = 3, nu = (5, 2, 2), Sigma_t = I, N_0 = 1.

Horizontal axis: es_db = 10 log10(E_s).  delta = E_s alpha / n_t with
alpha / n_t = 1/1040.
Vertical axis: sum rate R (nats and bits columns).

fig2_curves.csv   es_db, delta, zf_rate_nats, mmse_rate_nats, zf_rate_bits, mmse_rate_bits
                  (closed-form curves)
fig2_mc.csv       es_db, delta, receiver, mc_mean_nats, mc_se_nats, analytic_nats, z_score,
                  within_2se: Monte Carlo markers; every power level reuses the same
                  channel draws (common random numbers)
fig2_summary.json alpha check and pass flags
"""


@cli.group("figure")
def cmd_figure():
    """Regenerate the data behind the two reference figures."""


@cmd_figure.command("1")
@click.option("--samples", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=20240, show_default=True)
@click.option("--delta-set", default=FIG1_DELTAS, show_default=True, help="Comma-separated delta values.")
@click.option("--points", type=int, default=600, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", "out_dir", default="figure1", show_default=True)
@click.pass_context
def cmd_figure1(ctx, samples, seed, delta_set, points, workers, out_dir):
    """SINR densities for ZF and MMSE at several delta, analytic and Monte Carlo."""
    started = _now()
    spec = FIG_ENSEMBLE
    deltas = _parse_list(delta_set, "delta-set", float)
    if not deltas or any(not d > 0 for d in deltas):
        raise ConfigError("need one or more positive values", field="delta-set")
    _ensure_dir(out_dir)
    # common gamma/delta grid: union of the automatic grids of every curve
    grids = [auto_ratio_grid(spec, ReceiverConfig(r, d), points=points) for d in deltas for r in Receiver]
    hi = max(float(g[-1]) for g in grids)
    u = np.concatenate([[0.0], np.geomspace(1e-7 * hi, hi, 2 * points)])
    draws, rejected = draw_sinrs(spec, None, deltas, samples, seed, tuple(Receiver), workers)
    outputs, summary, ok = [], {"rejected": rejected, "deltas": {}}, True
    for i, d in enumerate(deltas):
        curves = {r: density_curve(spec, ReceiverConfig(r, d), grid=u * d) for r in Receiver}
        tag = "%g" % d
        cols = []
        for r in Receiver:
            # write u itself: gamma / delta would differ from it by rounding
            _, y = curves[r].on_ratio_axis()
            cols.append((u, y, curves[r].error * d))
        rows = zip(cols[0][0], cols[0][1], cols[0][2], cols[1][1], cols[1][2])
        outputs.append(_write_csv(os.path.join(out_dir, f"fig1_analytic_delta{tag}.csv"),
                                  ["gamma_over_delta", "zf_density", "zf_error", "mmse_density", "mmse_error"], rows))
        entry = {"overlap_l1": float(np.trapezoid(np.abs(cols[0][1] - cols[1][1]), cols[0][0]))}
        for r in Receiver:
            sample = draws[r][:, i, 0]
            rep = compare(curves[r], sample, seed=seed)
            entry[r.value] = {"ks_distance": rep.ks_distance, "ks_pass": rep.ks_pass,
                              "l1_distance": rep.l1_distance, "samples": rep.samples}
            ok &= rep.ks_pass
            edges, dens = _histogram(sample / d)
            outputs.append(_write_csv(os.path.join(out_dir, f"fig1_mc_{r.value}_delta{tag}.csv"),
                                      ["bin_left", "bin_right", "density"], zip(edges[:-1], edges[1:], dens)))
            click.echo(f"delta={tag:>6} {r.value:>4}: KS {rep.ks_distance:.5f} "
                       f"{'pass' if rep.ks_pass else 'FAIL'}, L1 {rep.l1_distance:.4f}")
        click.echo(f"delta={tag:>6} ZF/MMSE analytic L1 {entry['overlap_l1']:.4f}")
        summary["deltas"][tag] = entry
    summary["passed"] = bool(ok)
    spath = os.path.join(out_dir, "fig1_summary.json")
    with open(spath, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    rpath = os.path.join(out_dir, "README.txt")
    with open(rpath, "w") as fh:
        fh.write(_FIG1_README)
    outputs += [spath, rpath]
    config = {"ensemble": spec.to_dict(), "samples": samples, "deltas": list(deltas), "points": points,
              "workers": workers}
    _write_manifest(ctx, out_dir, "figure1", config, {"monte_carlo": seed}, outputs, started)
    return EXIT_OK if ok else EXIT_VERIFY


@cmd_figure.command("2")
@click.option("--runs", type=int, default=1000, show_default=True, help="Monte Carlo channel draws per point.")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--es-start", type=float, default=0.0, show_default=True)
@click.option("--es-stop", type=float, default=40.0, show_default=True)
@click.option("--es-step", type=float, default=5.0, show_default=True, help="Spacing of Monte Carlo markers (dB).")
@click.option("--curve-step", type=float, default=1.0, show_default=True, help="Spacing of analytic curves (dB).")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", "out_dir", default="figure2", show_default=True)
@click.pass_context
def cmd_figure2(ctx, runs, seed, es_start, es_stop, es_step, curve_step, workers, out_dir):
    """Sum rate versus E_s for ZF and MMSE, closed form and Monte Carlo."""
    started = _now()
    spec = FIG_ENSEMBLE
    if runs < 2:
        raise ConfigError("need at least 2 runs", field="runs")
    _ensure_dir(out_dir)
    alpha = normalization_alpha(spec)
    alpha_mc, alpha_se = normalization_alpha_mc(spec, samples=10_000, seed=seed)
    scale = alpha / spec.n_t

    def rates(d):
        eye = CorrelationSpec.identity(spec.n_t)
        zf = _analytic_sumrate(spec, eye, Receiver.ZF, d, closed_only=True).value
        mm = _analytic_sumrate(spec, eye, Receiver.MMSE, d, closed_only=True).value
        return zf, mm

    curve_rows, ordered = [], True
    for db in _db_grid(es_start, es_stop, curve_step):
        d = 10.0 ** (db / 10.0) * scale
        zf, mm = rates(d)
        ordered &= mm >= zf
        curve_rows.append((float(db), d, zf, mm, zf / math.log(2), mm / math.log(2)))
    outputs = [_write_csv(os.path.join(out_dir, "fig2_curves.csv"),
                          ["es_db", "delta", "zf_rate_nats", "mmse_rate_nats", "zf_rate_bits", "mmse_rate_bits"],
                          curve_rows)]
    marks = _db_grid(es_start, es_stop, es_step)
    deltas = [10.0 ** (db / 10.0) * scale for db in marks]
    draws, rejected = draw_sinrs(spec, None, deltas, runs, seed, tuple(Receiver), workers)
    mc_rows, within = [], True
    for i, (db, d) in enumerate(zip(marks, deltas)):
        analytic = dict(zip(Receiver, rates(d)))
        for r in Receiver:
            per_draw = np.log1p(draws[r][:, i, :]).sum(axis=1)
            mean, se = per_draw.mean(), per_draw.std(ddof=1) / math.sqrt(per_draw.size)
            z = (mean - analytic[r]) / se
            inside = bool(abs(z) <= 2.0)
            within &= inside
            mc_rows.append((float(db), d, r.value, mean, se, analytic[r], z, inside))
            click.echo(f"{db:6.2f} dB {r.value:>4}: analytic {analytic[r]:.6f}  MC {mean:.6f} +- {se:.4f}  "
                       f"z={z:+.2f}")
    outputs.append(_write_csv(os.path.join(out_dir, "fig2_mc.csv"),
                              ["es_db", "delta", "receiver", "mc_mean_nats", "mc_se_nats", "analytic_nats",
                               "z_score", "within_2se"], mc_rows))
    alpha_ok = abs(alpha_mc - alpha) <= 0.02 * alpha
    summary = {
        "alpha_over_nt": scale, "alpha_over_nt_mc": alpha_mc / spec.n_t, "alpha_mc_se": alpha_se / spec.n_t,
        "alpha_mc_within_2pct": bool(alpha_ok), "mmse_ge_zf": bool(ordered), "mc_within_2se": bool(within),
        "rejected": rejected, "passed": bool(alpha_ok and ordered and within),
    }
    spath = os.path.join(out_dir, "fig2_summary.json")
    with open(spath, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    rpath = os.path.join(out_dir, "README.txt")
    with open(rpath, "w") as fh:
        fh.write(_FIG2_README)
    outputs += [spath, rpath]
    config = {"ensemble": spec.to_dict(), "runs": runs, "es_db": [es_start, es_stop, es_step],
              "curve_step": curve_step, "n0": 1.0, "workers": workers}
    _write_manifest(ctx, out_dir, "figure2", config, {"monte_carlo": seed, "alpha_mc": seed}, outputs, started)
    click.echo(f"alpha/n_t = {scale:.6g} (MC {alpha_mc / spec.n_t:.6g}); MMSE >= ZF: {ordered}; "
               f"MC within 2 s.e.: {within}")
    return EXIT_OK if summary["passed"] else EXIT_VERIFY


@cli.command("rerun")
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
def cmd_rerun(manifest):
    """Replay the command recorded in a manifest (from its original working directory)."""
    with open(manifest) as fh:
        doc = json.load(fh)
    argv = doc.get("argv")
    if not argv or argv[0] == "rerun":
        raise ConfigError("manifest carries no replayable command line", field="argv")
    cwd = os.getcwd()
    os.chdir(doc.get("cwd", cwd))
    try:
        return main(argv)
    finally:
        os.chdir(cwd)


# ---------------------------------------------------------------------------
# entry points


def main(argv=None):
    """Run the CLI and return its exit code instead of exiting."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        rv = cli.main(args=argv, prog_name="linrx", standalone_mode=False, obj={"argv": argv})
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONFIG
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_VERIFY
    except (ConfigError, InadmissibleParameters) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        return EXIT_CONFIG
    except OSError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        return EXIT_CONFIG
    except (LinrxError, ArithmeticError, FloatingPointError) as exc:
        click.echo(f"numerical failure: {type(exc).__name__}: {exc}", err=True)
        return EXIT_NUMERIC
    return EXIT_OK if rv is None else int(rv)


def run():
    sys.exit(main())

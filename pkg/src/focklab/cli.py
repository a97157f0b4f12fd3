"""Command-line front-end chaining the toolkit into reproducible pipelines.

Every command embeds a ``config`` echo in its output files that is
sufficient to reproduce the run bit-identically. Exit codes: 0 success,
1 runtime/numerical failure, 2 usage error.
"""

import functools
import os
from pathlib import Path

import click
import numpy as np

from . import analysis, fock, homodyne, io, mle
from .channel import LossChannelSpec, apply_loss
from .exceptions import FocklabError

OUTPUT_DIR_ENV = "FOCKLAB_OUTPUT_DIR"


def _resolve_output(path):
    path = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    return path


def _runtime_errors(func):
    """Map toolkit failures to exit code 1 with a clean message."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (FocklabError, ValueError, OSError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _echo_metrics(metrics):
    click.echo(f"squeezing      {metrics['db_min']:+.3f} dB (V = {metrics['v_min']:.6f})")
    click.echo(f"anti-squeezing {metrics['db_max']:+.3f} dB (V = {metrics['v_max']:.6f})")
    click.echo(f"axis angle     {metrics['theta_min']:.6f} rad")
    click.echo(f"purity         {metrics['purity']:.6f}")
    click.echo(f"mean photons   {metrics['mean_n']:.6f}")


@click.group()
@click.version_option(package_name="focklab")
def main():
    """Simulate and reconstruct squeezed states in a truncated Fock space."""


@main.command("gen-state")
@click.option("--vacuum", "make_vacuum", is_flag=True, help="Emit the vacuum state.")
@click.option("--r", "r_param", type=float, default=None,
              help="Pure squeezed vacuum with this squeezing parameter.")
@click.option("--sq-db", type=float, default=None,
              help="Squeezed variance in dB (negative for squeezing).")
@click.option("--antisq-db", type=float, default=None,
              help="Anti-squeezed variance in dB.")
@click.option("--v-min", type=float, default=None, help="Squeezed variance, linear units.")
@click.option("--v-max", type=float, default=None, help="Anti-squeezed variance, linear units.")
@click.option("--theta0", type=float, default=0.0, show_default=True,
              help="Squeezing-axis angle in radians.")
@click.option("--dim", type=int, default=16, show_default=True, help="Fock truncation.")
@click.option("--output", "-o", required=True, type=click.Path(dir_okay=False))
@_runtime_errors
def gen_state(make_vacuum, r_param, sq_db, antisq_db, v_min, v_max, theta0, dim, output):
    """Generate a state file and print its squeezing metrics."""
    modes = [make_vacuum, r_param is not None,
             sq_db is not None or antisq_db is not None,
             v_min is not None or v_max is not None]
    if sum(modes) != 1:
        raise click.UsageError(
            "choose exactly one of --vacuum, --r, --sq-db/--antisq-db, --v-min/--v-max")
    if make_vacuum:
        rho = fock.vacuum(dim)
        kind = "vacuum"
    elif r_param is not None:
        rho = fock.squeezed_vacuum_pure(r_param, theta0, dim)
        kind = "squeezed_vacuum_pure"
    else:
        if sq_db is not None or antisq_db is not None:
            if sq_db is None or antisq_db is None:
                raise click.UsageError("--sq-db and --antisq-db must be given together")
            params = fock.SqueezedStateParams.from_db(sq_db, antisq_db, theta0)
        else:
            if v_min is None or v_max is None:
                raise click.UsageError("--v-min and --v-max must be given together")
            params = fock.SqueezedStateParams(v_min, v_max, theta0)
        rho = fock.squeezed_thermal(params, dim)
        kind = "squeezed_thermal"
    config = {"command": "gen-state", "kind": kind, "vacuum": bool(make_vacuum),
              "r": r_param, "sq_db": sq_db, "antisq_db": antisq_db,
              "v_min": v_min, "v_max": v_max, "theta0": theta0, "dim": dim}
    path = _resolve_output(output)
    io.save_density_matrix(path, rho, extra={"config": config})
    _echo_metrics(analysis.squeezing_metrics(rho))
    click.echo(f"wrote {path}")


@main.command("simulate")
@click.option("--state", "state_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Input state JSON.")
@click.option("--eta", type=float, default=None,
              help="Apply a loss channel with this power transmission first.")
@click.option("--phi", type=float, default=0.0, show_default=True,
              help="Beam-splitter phase of the loss channel.")
@click.option("--visibility", type=float, default=None,
              help="Homodyne visibility; applies loss of visibility^2.")
@click.option("--samples", type=int, default=500_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--sweeps", type=int, default=1, show_default=True,
              help="Number of linear 0..2pi phase sweeps across the record index.")
@click.option("--digitize", "bits", type=int, default=None,
              help="Quantize values with this many bits.")
@click.option("--digitize-range", type=float, default=None,
              help="Digitizer full range (defaults to 4*sqrt(2*V_max) of the state).")
@click.option("--output", "-o", required=True, type=click.Path(dir_okay=False))
@_runtime_errors
def simulate(state_path, eta, phi, visibility, samples, seed, sweeps, bits,
             digitize_range, output):
    """Sample phase-scanned quadratures from a state file."""
    rho = io.load_density_matrix(state_path)
    if eta is not None:
        rho = apply_loss(rho, LossChannelSpec(eta, phi).eta)
    if visibility is not None:
        rho = homodyne.detection_efficiency(rho, visibility)
    schedule = homodyne.PhaseSchedule(count=sweeps)
    dataset = homodyne.sample(rho, schedule, n_samples=samples, seed=seed)
    if bits is not None:
        if digitize_range is None:
            digitize_range = 4.0 * np.sqrt(2.0 * fock.variance_extrema(rho)[1])
        dataset = homodyne.digitize(dataset, bits=bits, value_range=digitize_range)
    config = {"command": "simulate", "state": str(state_path), "eta": eta, "phi": phi,
              "visibility": visibility, "samples": samples, "seed": seed,
              "sweeps": sweeps, "digitize_bits": bits, "digitize_range": digitize_range}
    dataset.meta["config"] = config
    path = _resolve_output(output)
    io.save_dataset(path, dataset)
    click.echo(f"wrote {len(dataset)} records to {path}")


@main.command("reconstruct")
@click.option("--data", "data_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Quadrature CSV.")
@click.option("--dim", type=int, default=16, show_default=True)
@click.option("--phase-bins", type=int, default=100, show_default=True)
@click.option("--value-bins", type=int, default=256, show_default=True)
@click.option("--max-iters", type=int, default=2000, show_default=True)
@click.option("--tol", type=float, default=1e-10, show_default=True,
              help="Relative log-likelihood stop tolerance.")
@click.option("--prob-floor", type=float, default=1e-12, show_default=True)
@click.option("--dilution", type=float, default=0.5, show_default=True)
@click.option("--point-povm", is_flag=True,
              help="Use the midpoint-rule fast path instead of bin-integrated projectors.")
@click.option("--output", "-o", required=True, type=click.Path(dir_okay=False))
@_runtime_errors
def reconstruct_cmd(data_path, dim, phase_bins, value_bins, max_iters, tol,
                    prob_floor, dilution, point_povm, output):
    """Maximum-likelihood reconstruction of a state from a dataset."""
    dataset = io.load_dataset(data_path)
    hist = mle.bin_dataset(dataset, phase_bins=phase_bins, value_bins=value_bins)
    result = mle.reconstruct(hist, dim=dim, max_iters=max_iters, rel_ll_tol=tol,
                             prob_floor=prob_floor, dilution=dilution,
                             point_povm=point_povm)
    config = {"command": "reconstruct", "data": str(data_path), "dim": dim,
              "phase_bins": phase_bins, "value_bins": value_bins,
              "max_iters": max_iters, "rel_ll_tol": tol, "prob_floor": prob_floor,
              "dilution": dilution, "point_povm": point_povm}
    path = _resolve_output(output)
    io.save_density_matrix(path, result.rho,
                           extra={"diagnostics": result.diagnostics(), "config": config})
    click.echo(f"iterations          {result.iterations}")
    click.echo(f"final log-likelihood {result.final_log_likelihood:.6f}")
    click.echo(f"converged           {result.converged}")
    click.echo(f"wrote {path}")


@main.command("channel-fit")
@click.option("--input", "input_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Input state JSON.")
@click.option("--target", "target_path", required=True,
              type=click.Path(exists=True, dir_okay=False), help="Target state JSON.")
@click.option("--grid-step", type=float, default=0.001, show_default=True)
@click.option("--align/--no-align", default=True, show_default=True,
              help="Rotate the input so the squeezing axes match before sweeping.")
@click.option("--output", "-o", required=True, type=click.Path(dir_okay=False))
@_runtime_errors
def channel_fit(input_path, target_path, grid_step, align, output):
    """Sweep the loss-channel transmission maximizing fidelity to a target."""
    rho_in = io.load_density_matrix(input_path)
    rho_target = io.load_density_matrix(target_path)
    sweep = analysis.eta_sweep(rho_in, rho_target, grid_step=grid_step,
                               align_phase=align)
    config = {"command": "channel-fit", "input": str(input_path),
              "target": str(target_path), "grid_step": grid_step, "align": align}
    path = _resolve_output(output)
    payload = sweep.to_dict()
    payload["config"] = config
    io.write_json(path, payload)
    click.echo(f"best_eta      {sweep.best_eta:.3f}")
    click.echo(f"best_fidelity {sweep.best_fidelity:.6f}")
    click.echo(f"wrote {path}")


@main.command("report")
@click.option("--state", "state_path", default=None,
              type=click.Path(exists=True, dir_okay=False), help="State JSON.")
@click.option("--data", "data_path", default=None,
              type=click.Path(exists=True, dir_okay=False), help="Quadrature CSV.")
@click.option("--curve-points", type=int, default=360, show_default=True)
@click.option("--phase-bins", type=int, default=50, show_default=True,
              help="Phase bins for the data-derived noise curve.")
@click.option("--wigner", "with_wigner", is_flag=True, help="Include a Wigner grid.")
@click.option("--wigner-extent", type=float, default=5.0, show_default=True)
@click.option("--wigner-points", type=int, default=201, show_default=True)
@click.option("--wigner-csv", type=click.Path(dir_okay=False), default=None,
              help="Also write the Wigner grid as x,p,w triples.")
@click.option("--output", "-o", required=True, type=click.Path(dir_okay=False))
@_runtime_errors
def report(state_path, data_path, curve_points, phase_bins, with_wigner,
           wigner_extent, wigner_points, wigner_csv, output):
    """Aggregate metrics, noise curves and optionally a Wigner grid."""
    if state_path is None and data_path is None:
        raise click.UsageError("give --state and/or --data")
    if wigner_csv is not None:
        with_wigner = True
    config = {"command": "report", "state": state_path and str(state_path),
              "data": data_path and str(data_path), "curve_points": curve_points,
              "phase_bins": phase_bins, "wigner": with_wigner,
              "wigner_extent": wigner_extent, "wigner_points": wigner_points,
              "wigner_csv": wigner_csv}
    payload = {"config": config}
    if state_path is not None:
        rho = io.load_density_matrix(state_path)
        block = {"metrics": analysis.squeezing_metrics(rho),
                 "noise_curve": analysis.noise_curve_from_state(rho, curve_points).to_dict()}
        if with_wigner:
            grid = analysis.wigner(rho, extent=wigner_extent, points=wigner_points)
            block["wigner"] = grid.to_dict()
            if wigner_csv is not None:
                io.save_wigner_csv(_resolve_output(wigner_csv), grid)
        payload["state"] = block
    if data_path is not None:
        dataset = io.load_dataset(data_path)
        payload["data"] = {
            "n_records": len(dataset),
            "noise_curve": analysis.noise_curve_from_data(dataset, phase_bins).to_dict(),
        }
    path = _resolve_output(output)
    io.write_json(path, payload)
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()

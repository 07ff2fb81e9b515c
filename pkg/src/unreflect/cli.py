"""Command-line entry points: suppress, evaluate, batch, synth, serve.

Parameter precedence is built-in defaults < config file < command-line
flags. The config file holds one ``key = value`` pair per line using the
flag names without dashes (e.g. ``lambda = 0.004``); ``#`` starts a
comment. REFLECT_THREADS caps worker parallelism.

Exit codes: 0 success, 1 usage or parameter error, 2 I/O or data error,
3 numerical failure.
"""

import csv
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import click

from .image import DimensionError, load_image, save_image
from .metrics import evaluate_pair
from .selection import NEAREST, STRICT, load_mask, mask_for_image
from .solver import NumericalError, SolverParams, suppress
from .synth import SyntheticSceneParams, compose_scene, make_scene

TRACE_HEADER = "# iter beta objective aux_objective inner_iters ms"

_CONFIG_KEYS = {
    "lambda": "lam",
    "gamma": "gamma",
    "beta-min": "beta_min",
    "beta-max": "beta_max",
    "kappa": "kappa",
    "adam-step": "adam_step",
    "inner-iters": "inner_iters",
    "inner-tol": "inner_rel_tol",
}


def _read_config(path):
    """Parse a key = value config file into SolverParams overrides."""
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ValueError(
                    f"{path}:{lineno}: unknown key {key!r} "
                    f"(known: {', '.join(sorted(_CONFIG_KEYS))})"
                )
            field = _CONFIG_KEYS[key]
            overrides[field] = int(value) if field == "inner_iters" else float(value)
    return overrides


def _build_params(config, **flags):
    base = SolverParams()
    if config:
        base = base.with_overrides(**_read_config(config))
    return base.with_overrides(**flags)


def _thread_cap(requested):
    cap = os.environ.get("REFLECT_THREADS", "").strip()
    if cap:
        try:
            cap_n = int(cap)
        except ValueError:
            raise ValueError(f"REFLECT_THREADS must be an integer, got {cap!r}")
        if cap_n < 1:
            raise ValueError(f"REFLECT_THREADS must be >= 1, got {cap_n}")
        return max(1, min(requested, cap_n))
    return max(1, requested)


def _format_trace_record(rec):
    return (
        f"{rec.index} {rec.beta:.10g} {rec.objective:.12g} "
        f"{rec.aux_objective:.12g} {rec.inner_iters} {rec.millis:.3f}"
    )


def _solver_options(fn):
    opts = [
        click.option("--lambda", "lam", type=float, default=None,
                     help="Prior weight [default: 0.002]."),
        click.option("--gamma", type=float, default=None,
                     help="Pixel-fidelity weight [default: 0.012]."),
        click.option("--beta-min", type=float, default=None,
                     help="Initial coupling weight [default: 2*lambda]."),
        click.option("--beta-max", type=float, default=None,
                     help="Final coupling weight cap [default: 1e5]."),
        click.option("--kappa", type=float, default=None,
                     help="Coupling growth factor per outer iteration [default: 2]."),
        click.option("--adam-step", type=float, default=None,
                     help="Descent step size [default: 0.001]."),
        click.option("--inner-iters", type=int, default=None,
                     help="Descent step budget per outer iteration [default: 100]."),
        click.option("--inner-tol", "inner_rel_tol", type=float, default=None,
                     help="Relative objective change that stops the descent "
                          "early [default: 1e-6]."),
        click.option("--config", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="key = value parameter file."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(package_name="unreflect")
def cli():
    """Reflection suppression toolkit."""


@cli.command("suppress")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("output_path", type=click.Path(dir_okay=False, writable=True))
@click.option("--mask", "mask_path", type=click.Path(dir_okay=False), default=None,
              help="Painted selection mask (white = reflection). Without it "
                   "the whole image is treated as selected.")
@click.option("--mask-policy", type=click.Choice([STRICT, NEAREST, "strict-required"]),
              default=STRICT, show_default=True,
              help="strict: mask dims must match; nearest: resample mask; "
                   "strict-required: a mask file must be supplied.")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None,
              help="Stream per-iteration records to this text file.")
@click.option("--threads", type=int, default=1, show_default=True,
              help="Reserved worker cap (suppress itself is single-image).")
@_solver_options
def cmd_suppress(input_path, output_path, mask_path, mask_policy, trace_path,
                 threads, config, **flags):
    """Remove marked reflections from one image."""
    if mask_policy == "strict-required":
        if mask_path is None:
            raise click.UsageError("--mask-policy strict-required needs --mask")
        mask_policy = STRICT
    _thread_cap(threads)
    params = _build_params(config, **flags)
    y = load_image(input_path)
    phi = mask_for_image(mask_path, y, resize_policy=mask_policy)

    trace_fh = open(trace_path, "w", encoding="utf-8") if trace_path else None
    try:
        if trace_fh:
            trace_fh.write(TRACE_HEADER + "\n")
            trace_fh.flush()

        def observer(rec, done, total):
            if trace_fh:
                trace_fh.write(_format_trace_record(rec) + "\n")
                trace_fh.flush()

        restored, _ = suppress(y, phi, params, observer=observer)
    finally:
        if trace_fh:
            trace_fh.close()
    save_image(restored, output_path)
    click.echo(f"wrote {output_path}")


@cli.command("evaluate")
@click.argument("restored_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("truth_path", type=click.Path(exists=True, dir_okay=False))
def cmd_evaluate(restored_path, truth_path):
    """Score a restored image against its ground truth."""
    restored = load_image(restored_path)
    truth = load_image(truth_path)
    report = evaluate_pair(truth, restored)
    for line in report.lines():
        click.echo(line)


def _batch_row(entry, params, metrics_only, mask_policy):
    input_path, truth_path, mask_path = entry
    truth = load_image(truth_path)
    if metrics_only:
        restored = load_image(input_path)
    else:
        y = load_image(input_path)
        phi = mask_for_image(mask_path, y, resize_policy=mask_policy)
        restored, _ = suppress(y, phi, params)
    report = evaluate_pair(truth, restored)
    return [input_path, truth_path, report.slmse, report.ssim, report.psnr]


@cli.command("batch")
@click.argument("manifest_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("report_path", type=click.Path(dir_okay=False, writable=True))
@click.option("--metrics-only", is_flag=True,
              help="Rows are (restored, truth) pairs; skip solving.")
@click.option("--mask-policy", type=click.Choice([STRICT, NEAREST]), default=STRICT,
              show_default=True)
@click.option("--threads", type=int, default=1, show_default=True,
              help="Process this many pairs concurrently (capped by "
                   "REFLECT_THREADS).")
@_solver_options
def cmd_batch(manifest_path, report_path, metrics_only, mask_policy, threads,
              config, **flags):
    """Run and score a manifest of image pairs, writing a CSV report.

    Manifest rows are ``input,truth`` or ``input,truth,mask``. The report
    has one row per pair plus an arithmetic-mean row.
    """
    params = _build_params(config, **flags)
    entries = []
    with open(manifest_path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            cells = [c.strip() for c in row if c.strip()]
            if not cells:
                continue
            if len(cells) == 2:
                entries.append((cells[0], cells[1], None))
            elif len(cells) == 3:
                entries.append((cells[0], cells[1], cells[2]))
            else:
                raise ValueError(
                    f"{manifest_path}: rows need 2 or 3 columns, got {len(cells)}"
                )
    if not entries:
        raise ValueError(f"{manifest_path}: manifest is empty")

    workers = _thread_cap(threads)
    if workers == 1:
        rows = [_batch_row(e, params, metrics_only, mask_policy) for e in entries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(
                pool.map(lambda e: _batch_row(e, params, metrics_only, mask_policy),
                         entries)
            )

    def mean(idx):
        return sum(r[idx] for r in rows) / len(rows)

    # %.17g keeps the float -> text -> float round trip exact
    with open(report_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["input", "truth", "slmse", "ssim", "psnr"])
        for row in rows:
            writer.writerow(row[:2] + [f"{v:.17g}" for v in row[2:]])
        writer.writerow(
            ["mean", ""] + [f"{mean(i):.17g}" for i in (2, 3, 4)]
        )
    click.echo(f"wrote {report_path} ({len(rows)} pairs)")


def _parse_size(text):
    try:
        h, w = text.lower().split("x")
        return int(h), int(w)
    except Exception:
        raise click.UsageError(f"--size must look like 128x128, got {text!r}")


@cli.command("synth")
@click.argument("out_y_path", type=click.Path(dir_okay=False, writable=True))
@click.argument("out_t_path", type=click.Path(dir_okay=False, writable=True))
@click.option("--t-image", "t_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Use this clean layer instead of generating one.")
@click.option("--r-image", "r_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Use this reflection layer instead of generating one.")
@click.option("--size", default="128x128", show_default=True,
              help="HxW of generated layers.")
@click.option("--weight", type=float, default=0.8, show_default=True,
              help="Clean-layer mixing weight in [0, 1].")
@click.option("--blur-sigma", type=float, default=3.0, show_default=True,
              help="Std-dev (pixels) of the reflection blur kernel.")
@click.option("--kernel-radius", type=int, default=None,
              help="Blur kernel radius [default: ceil(3*sigma)].")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--channels", type=click.Choice(["1", "3"]), default="1",
              show_default=True, help="Channels for generated layers.")
def cmd_synth(out_y_path, out_t_path, t_path, r_path, size, weight, blur_sigma,
              kernel_radius, seed, channels):
    """Compose a synthetic scene: clean layer plus blurred reflection."""
    scene = SyntheticSceneParams(
        weight=weight, blur_sigma=blur_sigma, kernel_radius=kernel_radius, seed=seed
    )
    if t_path is not None and r_path is not None:
        t = load_image(t_path)
        r = load_image(r_path)
        y = compose_scene(t, r, scene)
    elif t_path is None and r_path is None:
        dims = _parse_size(size)
        y, t, _ = make_scene(dims, scene, channels=int(channels))
    else:
        from .synth import generate_clean_layer, generate_reflection_layer

        if t_path is not None:
            t = load_image(t_path)
            r = generate_reflection_layer(
                t.shape[:2], seed=seed, channels=1 if t.ndim == 2 else t.shape[2]
            )
        else:
            r = load_image(r_path)
            t = generate_clean_layer(
                r.shape[:2], seed=seed, channels=1 if r.ndim == 2 else r.shape[2]
            )
        y = compose_scene(t, r, scene)
    save_image(y, out_y_path)
    save_image(t, out_t_path)
    click.echo(f"wrote {out_y_path} and {out_t_path}")


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8787, show_default=True)
@click.option("--workers", type=int, default=2, show_default=True,
              help="Solver worker threads (capped by REFLECT_THREADS).")
@click.option("--max-upload-mb", type=int, default=64, show_default=True)
@click.option("--cors-origin", multiple=True, default=("*",), show_default=True,
              help="Allowed browser origins.")
def cmd_serve(host, port, workers, max_upload_mb, cors_origin):
    """Run the job service the browser UI talks to."""
    import uvicorn

    from .service import create_app

    app = create_app(
        workers=_thread_cap(workers),
        max_upload_mb=max_upload_mb,
        cors_origins=list(cors_origin),
    )
    uvicorn.run(app, host=host, port=port, log_level="info")


def run(argv=None) -> int:
    """Dispatch with the documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.FileError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 2
    except click.ClickException as exc:
        exc.show()
        return 1
    except NumericalError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 3
    except DimensionError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

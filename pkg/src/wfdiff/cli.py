"""Command-line interface: decomposition, spectral analysis, swap diagnostics,
metrics, desk-scale training smoke runs, sampling, and end-to-end enhancement.

All file outputs are deterministic given identical inputs and --seed.
Exit codes: 0 success, 1 validation/I-O error (diagnostic on stderr),
2 usage error.
"""

from __future__ import annotations

import csv
import sys

import click

from . import checkpoint as ckpt
from . import train as pipelines
from .config import RunConfig, config_from_dict, load_config
from .errors import FormatError
from .freq_analysis import SwapStrategy, analyze_corpus, psnr, ssim, swap
from .fourier import Spectrum, fft2, ifft2
from .imageio import Image, read_ppm, write_ppm
from .rng import Rng
from .wavelet import SubbandSet, dwt2, idwt2, pad_even
from .wfdt import load_wfdt, save_wfdt

_BAND_SUFFIXES = ("ll", "lh", "hl", "hh")


@click.group()
def cli():
    """Frequency-domain image enhancement toolkit."""


@cli.command("dwt")
@click.argument("image", type=click.Path(exists=True))
@click.option("--out", required=True, help="Output basename; writes .ll/.lh/.hl/.hh WFDT files.")
def dwt_cmd(image, out):
    """Decompose an image into its four wavelet subbands."""
    img = read_ppm(image)
    padded, _ = pad_even(img.tensor)
    bands = dwt2(padded).bands()
    for name in _BAND_SUFFIXES:
        save_wfdt(f"{out}.{name}", bands[name])


@cli.command("idwt")
@click.argument("base")
@click.option("--out", required=True, help="Output PPM/PGM path.")
def idwt_cmd(base, out):
    """Reassemble an image from BASE.ll/.lh/.hl/.hh subband files."""
    bands = {name: load_wfdt(f"{base}.{name}") for name in _BAND_SUFFIXES}
    write_ppm(Image(idwt2(SubbandSet(**bands))), out)


@cli.command("fft")
@click.argument("image", type=click.Path(exists=True))
@click.option("--out", required=True, help="Output basename; writes .amp/.phase WFDT files.")
def fft_cmd(image, out):
    """Fourier amplitude/phase decomposition of an image."""
    spec = fft2(read_ppm(image).tensor)
    save_wfdt(f"{out}.amp", spec.amplitude)
    save_wfdt(f"{out}.phase", spec.phase)


@cli.command("recombine")
@click.option("--amp", "amp_base", required=True, help="Basename whose .amp is used.")
@click.option("--phase", "phase_base", required=True, help="Basename whose .phase is used.")
@click.option("--out", required=True)
def recombine_cmd(amp_base, phase_base, out):
    """Inverse transform of one spectrum's amplitude with another's phase."""
    spec = Spectrum(load_wfdt(f"{amp_base}.amp"), load_wfdt(f"{phase_base}.phase"))
    write_ppm(Image(ifft2(spec)), out)


@cli.command("swap")
@click.argument("image_a", type=click.Path(exists=True))
@click.argument("image_b", type=click.Path(exists=True))
@click.option("--strategy", type=click.Choice(["s1", "s2", "s3"]), default="s1")
@click.option("--out-a", required=True)
@click.option("--out-b", required=True)
def swap_cmd(image_a, image_b, strategy, out_a, out_b):
    """Swap amplitude content between two images."""
    oa, ob = swap(read_ppm(image_a), read_ppm(image_b), SwapStrategy(strategy))
    write_ppm(oa, out_a)
    write_ppm(ob, out_b)


@cli.command("metrics")
@click.argument("image", type=click.Path(exists=True))
@click.argument("reference", type=click.Path(exists=True))
def metrics_cmd(image, reference):
    """Print PSNR (dB) and SSIM of IMAGE against REFERENCE."""
    x, ref = read_ppm(image), read_ppm(reference)
    click.echo(f"psnr_db: {psnr(x, ref)}")
    click.echo(f"ssim: {ssim(x, ref)}")


@cli.command("analyze")
@click.option("--strategy", type=click.Choice(["s1", "s2", "s3"]), required=True)
@click.option("--pairs", "manifest", required=True, type=click.Path(exists=True),
              help="CSV manifest with columns degraded_path, reference_path.")
@click.option("--out", required=True, help="Output CSV report path.")
def analyze_cmd(strategy, manifest, out):
    """Amplitude-swap diagnostic over a corpus of image pairs."""
    with open(manifest, newline="") as f:
        rows = [r for r in csv.reader(f) if r]
    if rows and rows[0][:1] == ["degraded_path"]:
        rows = rows[1:]
    pairs = [(r[0].strip(), r[1].strip()) for r in rows]
    report = analyze_corpus(pairs, SwapStrategy(strategy))
    report.write_csv(out)
    for pair_id, msg in report.errors:
        click.echo(f"pair {pair_id}: skipped ({msg})", err=True)
    click.echo(f"mean psnr_db: {report.mean_psnr}")
    click.echo(f"mean ssim: {report.mean_ssim}")


def _load_cfg(path) -> RunConfig:
    return load_config(path) if path else config_from_dict({})


def _net_from_checkpoint(path):
    params, meta = ckpt.load_checkpoint(path)
    cfg = config_from_dict(meta["config"])
    rng = Rng(cfg.train.seed)
    net = pipelines.build_net(cfg, meta["image_channels"], rng.spawn(1))
    net.load_state({k[len("net."):]: v for k, v in params.items() if k.startswith("net.")})
    denoisers = None
    if meta.get("stage2"):
        ldfb, hdfb = pipelines.build_denoisers(cfg, meta["image_channels"], rng.spawn(2))
        ldfb.load_state({k[len("ldfb."):]: v for k, v in params.items() if k.startswith("ldfb.")})
        hdfb.load_state({k[len("hdfb."):]: v for k, v in params.items() if k.startswith("hdfb.")})
        denoisers = (ldfb, hdfb)
    return net, denoisers, cfg, meta


@cli.command("train-stage1")
@click.option("--degraded", required=True, type=click.Path(exists=True))
@click.option("--clean", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--steps", type=int, default=None, help="Override train.stage1_steps.")
@click.option("--seed", type=int, default=None, help="Override train.seed.")
@click.option("--out", required=True, help="Output checkpoint path.")
@click.option("--log-every", type=int, default=100)
def train_stage1_cmd(degraded, clean, config_path, steps, seed, out, log_every):
    """Overfit the enhancement net on one degraded/clean pair."""
    cfg = _load_cfg(config_path)
    if steps is not None:
        cfg.train.stage1_steps = steps
    if seed is not None:
        cfg.train.seed = seed
    deg, gt = read_ppm(degraded), read_ppm(clean)
    rng = Rng(cfg.train.seed)
    net = pipelines.build_net(cfg, deg.channels, rng.spawn(1))
    hist = pipelines.train_stage1(
        net, deg, gt, cfg.train.stage1_steps, lr=cfg.train.lr,
        w_h=cfg.train.loss_h_weight, w_a=cfg.train.loss_a_weight, log_every=log_every)
    params = {f"net.{k}": v for k, v in net.named_parameters().items()}
    meta = {"config": cfg.to_dict(), "image_channels": deg.channels, "stage2": False}
    ckpt.save_checkpoint(out, params, meta)
    click.echo(f"initial loss: {hist[0]}")
    click.echo(f"final loss: {hist[-1]}")


@cli.command("train-stage2")
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True))
@click.option("--degraded", required=True, type=click.Path(exists=True))
@click.option("--clean", required=True, type=click.Path(exists=True))
@click.option("--steps", type=int, default=None, help="Override train.stage2_steps.")
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True)
@click.option("--log-every", type=int, default=100)
def train_stage2_cmd(ckpt_path, degraded, clean, steps, seed, out, log_every):
    """Train the residual diffusion denoisers on top of a stage-1 checkpoint."""
    net, _, cfg, meta = _net_from_checkpoint(ckpt_path)
    if steps is not None:
        cfg.train.stage2_steps = steps
    if seed is not None:
        cfg.train.seed = seed
    deg, gt = read_ppm(degraded), read_ppm(clean)
    rng = Rng(cfg.train.seed)
    # Stage-1 weights are frozen; only the denoisers train.
    initial = pipelines.stage1_outputs(net, deg)
    gt_padded, _ = pad_even(gt.tensor)
    gt_bands = dwt2(gt_padded)
    sched = pipelines.build_schedule(cfg)
    ldfb, hdfb = pipelines.build_denoisers(cfg, deg.channels, rng.spawn(2))
    ll_hist, hf_hist = pipelines.train_stage2(
        ldfb, hdfb, initial, gt_bands, sched, cfg.train.stage2_steps,
        rng.spawn(3), lr=cfg.train.lr, loss_kind=cfg.diffusion.loss, log_every=log_every)
    params = {f"net.{k}": v for k, v in net.named_parameters().items()}
    params.update({f"ldfb.{k}": v for k, v in ldfb.named_parameters().items()})
    params.update({f"hdfb.{k}": v for k, v in hdfb.named_parameters().items()})
    meta = {"config": cfg.to_dict(), "image_channels": deg.channels, "stage2": True}
    ckpt.save_checkpoint(out, params, meta)
    click.echo(f"final ll loss: {ll_hist[-1]}")
    click.echo(f"final hf loss: {hf_hist[-1]}")


@cli.command("sample")
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True))
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=0)
@click.option("--steps", type=int, default=None, help="Override diffusion step count.")
@click.option("--out", required=True)
def sample_cmd(ckpt_path, input_path, seed, steps, out):
    """Diffusion-adjusted enhancement from a stage-2 checkpoint."""
    net, denoisers, cfg, _ = _net_from_checkpoint(ckpt_path)
    if denoisers is None:
        raise FormatError("checkpoint has no denoisers; run train-stage2 first")
    if steps is not None:
        cfg.diffusion.steps = steps
        cfg.diffusion.validate()
    img = read_ppm(input_path)
    sched = pipelines.build_schedule(cfg)
    result = pipelines.enhance(net, img, *denoisers, sched=sched, rng=Rng(seed))
    write_ppm(result, out)


@cli.command("enhance")
@click.option("--checkpoint", "ckpt_path", required=True, type=click.Path(exists=True))
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True)
@click.option("--adjust", is_flag=True, help="Also apply the diffusion adjustment (stage-2 checkpoint).")
@click.option("--seed", type=int, default=0)
def enhance_cmd(ckpt_path, input_path, out, adjust, seed):
    """End-to-end enhancement: stage 1, optionally plus diffusion adjustment."""
    net, denoisers, cfg, _ = _net_from_checkpoint(ckpt_path)
    img = read_ppm(input_path)
    if adjust:
        if denoisers is None:
            raise FormatError("--adjust needs a stage-2 checkpoint")
        sched = pipelines.build_schedule(cfg)
        result = pipelines.enhance(net, img, *denoisers, sched=sched, rng=Rng(seed))
    else:
        result = pipelines.enhance(net, img)
    write_ppm(result, out)


def main(argv=None):
    try:
        cli(args=argv, standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.UsageError as e:
        e.show()
        return 2
    except click.ClickException as e:
        e.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except (OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

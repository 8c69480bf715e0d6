"""Command-line entry point: ``dsm-imaging {simulate,image,verify,subtract,version}``.

Exit codes: 0 success, 1 internal error, 2 input error, 3 degenerate data.
Antenna indices on the command line are 1-based.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import DegenerateDataError, DSMError
from .forward import (
    AnalyticField,
    TabulatedField,
    add_noise,
    born_synthesize,
    read_sparams_csv,
    subtract_background,
    write_sparams_csv,
)
from .imaging import (
    DEFAULT_THRESHOLD,
    default_suppression_radius,
    dsm_indicator,
    extract_peaks,
    mdsm_indicator,
    parse_transmitters,
    write_map_csv,
    write_map_pgm,
    write_peaks_csv,
)
from .oracle import verify_theorem
from .scene import load_scenario, scale_array
from .specfun import SeriesBudget

log = logging.getLogger("dsm_imaging")

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2, 3


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _manifest_path(path: Path) -> Path:
    return path.with_suffix(".manifest.json")


def _write_manifest(target: Path, command, inputs, outputs, scenario, started):
    manifest = {
        "command": command,
        "inputs": [str(Path(p).resolve()) for p in inputs],
        "scenario_sha256": _sha256(Path(scenario)) if scenario else None,
        "outputs": [str(Path(p).resolve()) for p in outputs],
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "duration_s": time.perf_counter() - started,
        "version": __version__,
    }
    target.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return target


def _field_source(path, scene):
    if path is None:
        return AnalyticField.for_scene(scene)
    field = TabulatedField.from_csv(path)
    if field.n_antennas != scene.array.count:
        raise DSMError(f"{path}: {field.n_antennas} antennas, scenario has {scene.array.count}")
    return field


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    scene = load_scenario(args.scenario)
    data = born_synthesize(scene, _field_source(args.field, scene))
    if args.snr_db is not None:
        data = add_noise(data, args.snr_db, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_sparams_csv(data, out)
    inputs = [args.scenario] + ([args.field] if args.field else [])
    _write_manifest(_manifest_path(out), "simulate", inputs, [out], args.scenario, started)
    log.info("wrote %d measured entries to %s", int(data.mask.sum()), out)
    return EXIT_OK


def cmd_image(args) -> int:
    started = time.perf_counter()
    scene = load_scenario(args.scenario)
    n = scene.array.count
    data = read_sparams_csv(args.data, n_antennas=None)
    if data.n_antennas != n:
        raise DSMError(f"{args.data}: data has {data.n_antennas} antennas, scenario has {n}")
    if data.freq != scene.medium.freq:
        raise DSMError(f"{args.data}: frequency {data.freq} Hz != scenario {scene.medium.freq} Hz")
    source = _field_source(args.field, scene)
    transmitters = parse_transmitters(args.transmitters, n)
    radius = args.radius or default_suppression_radius(scene.medium)

    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    outputs = []

    def emit(imap, tag):
        base = prefix.with_name(f"{prefix.name}_{tag}")
        paths = [
            base.with_name(base.name + ".csv"),
            base.with_name(base.name + ".pgm"),
            base.with_name(base.name + "_peaks.csv"),
        ]
        write_map_csv(imap, paths[0])
        write_map_pgm(imap, paths[1])
        peaks = extract_peaks(imap, args.threshold, radius)
        if peaks.warning:
            log.warning("%s: %s", tag, peaks.warning)
        write_peaks_csv(peaks, paths[2])
        outputs.extend(paths)

    maps = {}
    for t in transmitters:
        maps[t] = dsm_indicator(data, source, scene.grid, t, workers=args.workers)
        emit(maps[t], f"tx{t:02d}")
    if len(transmitters) > 1:
        emit(mdsm_indicator(data, source, scene.grid, transmitters, maps), "mdsm")
    inputs = [args.scenario, args.data] + ([args.field] if args.field else [])
    _write_manifest(prefix.with_name(prefix.name + ".manifest.json"), "image", inputs, outputs, args.scenario, started)
    log.info("wrote %d files with prefix %s", len(outputs), prefix)
    return EXIT_OK


def cmd_verify(args) -> int:
    started = time.perf_counter()
    scene = load_scenario(args.scenario)
    if args.array_scale != 1.0:
        scene = scale_array(scene, args.array_scale)
    budget = SeriesBudget(args.s_max, args.tol) if args.s_max is not None else None
    report = verify_theorem(scene, args.n_prime, budget, self_check=args.self_check)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_json(), encoding="utf-8")
    _write_manifest(_manifest_path(out), "verify", [args.scenario], [out], args.scenario, started)
    log.info("l_inf=%.6g l2=%.6g regime_ok=%s", report.l_inf, report.l2, report.regime_ok)
    return EXIT_OK


def cmd_subtract(args) -> int:
    started = time.perf_counter()
    total = read_sparams_csv(args.total, args.n_antennas)
    background = read_sparams_csv(args.background, args.n_antennas or total.n_antennas)
    diff = subtract_background(total, background)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_sparams_csv(diff, out)
    _write_manifest(_manifest_path(out), "subtract", [args.total, args.background], [out], None, started)
    return EXIT_OK


def cmd_version(args) -> int:
    print(__version__)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dsm-imaging", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="synthesize Born S-parameters for a scenario")
    s.add_argument("scenario")
    s.add_argument("-o", "--out", required=True, help="output S-parameter CSV")
    s.add_argument("--snr-db", type=float, default=None, help="add noise at this SNR (default: none)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--field", default=None, help="tabulated incident-field CSV (default: analytic)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("image", help="DSM / MDSM maps and peaks from S-parameter data")
    s.add_argument("scenario")
    s.add_argument("data")
    s.add_argument("-t", "--transmitters", default="1", help='"all" or e.g. "1,5,9,13" (default: 1)')
    s.add_argument("-o", "--out-prefix", required=True)
    s.add_argument("--field", default=None, help="tabulated incident-field CSV (default: analytic)")
    s.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    s.add_argument("--radius", type=float, default=None, help="peak suppression radius in m (default: wavelength/2)")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_image)

    s = sub.add_parser("verify", help="compare the DSM map with its Bessel-series structure")
    s.add_argument("scenario")
    s.add_argument("-n", "--n-prime", type=int, default=1)
    s.add_argument("--s-max", type=int, default=None, help="series truncation (default: ceil(k * diameter) + 30)")
    s.add_argument("--tol", type=float, default=1.0e-12)
    s.add_argument("--array-scale", type=float, default=1.0, help="multiply the antenna radius")
    s.add_argument("--self", dest="self_check", action="store_true", help="compare the DSM map with itself")
    s.add_argument("-o", "--out", required=True, help="report JSON")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("subtract", help="total minus background S-parameters")
    s.add_argument("total")
    s.add_argument("background")
    s.add_argument("-o", "--out", required=True)
    s.add_argument("--n-antennas", type=int, default=None)
    s.set_defaults(func=cmd_subtract)

    s = sub.add_parser("version", help="print the version")
    s.set_defaults(func=cmd_version)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except DegenerateDataError as exc:
        print(f"error: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DSMError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: simulate | prescreen | extract | train | crossval
| score | fuse | plot | config.

Every command validates its inputs, writes its artifacts under --out, and
finishes by atomically writing a run manifest (config hash, seeds, input and
output paths with content hashes, per-stage wall-clock).  Exit codes:
0 success, 2 configuration error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, discriminate, evaluate, prescreen
from .config import PipelineConfig, dump_config, load_config
from .errors import ConfigError, DataError, GprError
from .model import (
    Source,
    extract_cube,
    meters_to_index,
    read_alarm_csv,
    read_lane,
    read_truth_csv,
    write_alarm_csv,
    write_lane,
    write_truth_csv,
)
from .preprocess import align_ground, depth_whiten, downsample_time, estimate_ground, remove_ground
from .simulate import load_sim_spec, synth_lane
from .svgplot import write_roc_svg

_FUSED_KEY = "fused"


class _Manifest:
    def __init__(self, out_dir: Path, cfg_text: str, seed: int):
        self.data = {
            "tool_version": __version__,
            "config_hash": hashlib.sha256(cfg_text.encode()).hexdigest(),
            "seed": seed,
            "inputs": [],
            "outputs": {},
            "stage_seconds": {},
        }
        self.out_dir = out_dir
        self._t0 = time.monotonic()
        self._stage_start = self._t0

    def stage(self, name: str) -> None:
        now = time.monotonic()
        self.data["stage_seconds"][name] = round(now - self._stage_start, 6)
        self._stage_start = now

    def add_inputs(self, *paths) -> None:
        self.data["inputs"].extend(str(p) for p in paths)

    def add_output(self, path) -> None:
        digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        self.data["outputs"][str(Path(path).name)] = digest

    def write(self) -> None:
        self.data["total_seconds"] = round(time.monotonic() - self._t0, 6)
        target = self.out_dir / "manifest.json"
        tmp = target.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n")
        os.replace(tmp, target)


def _prepare_out_dir(out, force: bool) -> Path:
    out = Path(out)
    if out.exists() and any(out.iterdir()) and not force:
        raise DataError(f"output directory {out} is not empty; pass --force to reuse it")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_cfg(args) -> PipelineConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    env_seed = os.environ.get("GPRBTD_SEED")
    if env_seed is not None:
        try:
            cfg.seed = int(env_seed)
        except ValueError:
            raise ConfigError(f"GPRBTD_SEED must be an integer, got {env_seed!r}")
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "jobs", None) is not None:
        cfg.jobs = args.jobs
    return cfg


def _lane_paths(lanes_arg: str) -> list[Path]:
    p = Path(lanes_arg)
    if p.is_dir():
        headers = sorted(q for q in p.glob("*.json") if q.with_suffix(".f32").exists())
        if not headers:
            raise DataError(f"no lane containers (*.json + *.f32) found in {p}")
        return headers
    if not p.exists():
        raise DataError(f"lane path {p} does not exist")
    return [p]


def _load_lanes(lanes_arg: str):
    lanes = []
    for header in _lane_paths(lanes_arg):
        truth = header.with_name(header.stem + "_truth.csv")
        lanes.append(read_lane(header, truth if truth.exists() else None))
    return lanes


def _map_jobs(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    spec = load_sim_spec(args.spec)
    out = _prepare_out_dir(args.out, args.force)
    manifest = _Manifest(out, Path(args.spec).read_text(), spec.seed)
    manifest.add_inputs(args.spec)
    for i in range(spec.n_lanes):
        lane = synth_lane(spec, i)
        header = out / f"{lane.lane_id}.json"
        write_lane(lane, header)
        truth_path = out / f"{lane.lane_id}_truth.csv"
        write_truth_csv(lane.truth, truth_path)
        for p in (header, header.with_suffix(".f32"), truth_path):
            manifest.add_output(p)
    manifest.stage("simulate")
    manifest.write()
    print(f"wrote {spec.n_lanes} lane(s) to {out}")
    return 0


def _prescreen_one(lane, cfg):
    raw = lane.volume
    if raw.ground_index is None:
        search = max(1, int(raw.shape[0] * cfg.ground_search_frac))
        raw = align_ground(raw, estimate_ground(raw, search), cfg.ground_target_index)
    below = remove_ground(raw)
    f2 = prescreen.f2_map(below, cfg)
    f2_alarms = prescreen.map_alarms_cc(f2, cfg.f2_threshold, lane.lane_id)
    whitened = depth_whiten(below, cfg.whiten_half_window, cfg.whiten_guard, cfg.whiten_eps)
    params = prescreen.ConcavityParams(cfg.ccy_omega, cfg.ccy_gamma, cfg.ccy_max_arm)
    ccy = prescreen.ccy_map(whitened, params, cfg.ccy_smooth_sigma)
    ccy_alarms = prescreen.ccy_alarms(ccy, cfg.ccy_threshold, lane.lane_id)
    return f2_alarms, ccy_alarms


def cmd_prescreen(args) -> int:
    cfg = _load_cfg(args)
    out = _prepare_out_dir(args.out, args.force)
    manifest = _Manifest(out, dump_config(cfg), cfg.seed)
    lanes = _load_lanes(args.lanes)
    manifest.add_inputs(*(str(p) for p in _lane_paths(args.lanes)))

    per_lane = _map_jobs(lambda lane: _prescreen_one(lane, cfg), lanes, cfg.jobs)
    manifest.stage("maps")

    all_f2 = [a for f2a, _ in per_lane for a in f2a]
    all_ccy = [a for _, ca in per_lane for a in ca]
    truth = [t for lane in lanes for t in lane.truth]
    rescale = prescreen.fit_rescale(
        all_ccy, all_f2, truth,
        halo_m=cfg.halo_m, proximity_m=cfg.merge_proximity_m,
        weights=(cfg.merge_weight_f2, cfg.merge_weight_ccy),
    )
    manifest.stage("rescale_fit")

    for lane, (f2a, ca) in zip(lanes, per_lane):
        fused = prescreen.merge_alarms(
            f2a, prescreen.rescale_alarms(ca, rescale), cfg.merge_proximity_m,
            (cfg.merge_weight_f2, cfg.merge_weight_ccy),
        )
        for tag, alarms in (("f2", f2a), ("ccy", ca), ("fused", fused)):
            path = out / f"{lane.lane_id}_{tag}.csv"
            write_alarm_csv(alarms, path)
            manifest.add_output(path)
        print(f"{lane.lane_id}: {len(f2a)} F2 + {len(ca)} CCY -> {len(fused)} fused alarms")
    (out / "rescale.json").write_text(
        json.dumps({"a": rescale.a, "b": rescale.b, "c": rescale.c}, indent=2) + "\n"
    )
    manifest.add_output(out / "rescale.json")
    manifest.stage("merge")
    manifest.write()
    return 0


def _alarms_for_lanes(alarms_arg: str, lanes) -> dict[str, list]:
    """Fused-alarm CSVs from a directory ({lane}_fused.csv) or one CSV."""
    p = Path(alarms_arg)
    out = {}
    if p.is_dir():
        for lane in lanes:
            path = p / f"{lane.lane_id}_fused.csv"
            if not path.exists():
                raise DataError(f"missing fused alarm file {path}")
            out[lane.lane_id] = read_alarm_csv(path)
    else:
        alarms = read_alarm_csv(p)
        for lane in lanes:
            out[lane.lane_id] = [a for a in alarms if a.lane_id == lane.lane_id]
    return out


def cmd_extract(args) -> int:
    cfg = _load_cfg(args)
    kind = args.kind
    if kind not in discriminate.KINDS:
        raise ConfigError(f"unknown feature kind {kind!r}; expected one of {discriminate.KINDS}")
    lanes = _load_lanes(args.lanes)
    alarms_by_lane = _alarms_for_lanes(args.alarms, lanes)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    import csv as _csv

    from .features import FeatureKind, lg_feature, lg_feature_matrix

    with open(out_path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        header_written = False
        for lane in lanes:
            prepared = discriminate.prepare_lane(lane, cfg)
            labeled, _ = evaluate.label_alarms(alarms_by_lane[lane.lane_id], lane.truth, cfg.halo_m)
            for la in labeled:
                rows = _extraction_rows(la, prepared, cfg, kind)
                for t, fkind, values in rows:
                    if not header_written:
                        writer.writerow(
                            ["lane_id", "x_m", "y_m", "t", "kind", "label"]
                            + [f"v{i}" for i in range(len(values))]
                        )
                        header_written = True
                    writer.writerow(
                        [la.alarm.lane_id, repr(la.alarm.x_m), repr(la.alarm.y_m), t,
                         fkind, int(la.is_hit)] + [repr(float(v)) for v in values]
                    )
    print(f"wrote features to {out_path}")
    return 0


def _extraction_rows(la, prepared, cfg, kind):
    from .features import FeatureKind, msek_depths, sed_feature

    vol = prepared.volume
    if kind == "ehd":
        feats = discriminate._ehd_depth_features(prepared, la.alarm, cfg)
        return [
            (fv.anchor[0], fv.kind.value, fv.values)
            for key in (FeatureKind.EHD_DT, FeatureKind.EHD_CT)
            for fv in feats[key]
        ]
    if kind == "lg":
        from .features import lg_feature, lg_feature_matrix

        matrix = lg_feature_matrix(discriminate.standard_cube(vol, la.alarm, cfg), cfg)
        return [(0, FeatureKind.LG.value, lg_feature(matrix).values)]
    if kind == "gprhog":
        ix = meters_to_index(la.alarm.x_m, vol.dx, vol.shape[1])
        iy = meters_to_index(la.alarm.y_m, vol.dy, vol.shape[2])
        vol_ds = prepared.volume_ds
        depths = msek_depths(vol_ds, ix, iy, cfg.msek_smooth_len, k=cfg.hog_pos_patches)
        rows = []
        for d in depths:
            h_tx, h_ty = discriminate._hog_pair(vol_ds, la.alarm, d - cfg.hog_cube_t // 2, cfg)
            rows.append((d, h_tx.kind.value, h_tx.values))
            rows.append((d, h_ty.kind.value, h_ty.values))
        return rows
    ix = meters_to_index(la.alarm.x_m, vol.dx, vol.shape[1])
    iy = meters_to_index(la.alarm.y_m, vol.dy, vol.shape[2])
    depths = msek_depths(vol, ix, iy, cfg.msek_smooth_len, k=cfg.sed_train_maxima)
    rows = []
    for d in depths:
        fv = sed_feature(
            vol, ix, iy, d - cfg.sed_lead, window_t=cfg.sed_window_t,
            patch=cfg.sed_patch, cells=cfg.sed_cells, edge_threshold=cfg.sed_edge_threshold,
        )
        rows.append((fv.anchor[0], fv.kind.value, fv.values))
    return rows


def cmd_train(args) -> int:
    from .learn.serialize import save_model

    cfg = _load_cfg(args)
    kinds = _parse_kinds(args.kinds, allow_fusion=False)
    lanes = _load_lanes(args.lanes)
    alarms_by_lane = _alarms_for_lanes(args.alarms, lanes)
    out = _prepare_out_dir(args.out, args.force)
    manifest = _Manifest(out, dump_config(cfg), cfg.seed)
    prepared = {lane.lane_id: discriminate.prepare_lane(lane, cfg) for lane in lanes}
    train_labeled = []
    for lane in lanes:
        labeled, _ = evaluate.label_alarms(alarms_by_lane[lane.lane_id], lane.truth, cfg.halo_m)
        train_labeled.extend(labeled)
    for kind in kinds:
        disc = discriminate.train_discriminator(kind, train_labeled, prepared, cfg, cfg.seed)
        path = out / f"{kind}.model"
        save_model(disc, path)
        manifest.add_output(path)
        print(f"trained {kind} on {len(train_labeled)} alarms -> {path}")
        manifest.stage(f"train_{kind}")
    manifest.write()
    return 0


def _parse_kinds(arg: str, allow_fusion: bool) -> list[str]:
    kinds = [k.strip() for k in arg.split(",") if k.strip()]
    for k in kinds:
        if k not in discriminate.KINDS and not (allow_fusion and k == "fusion"):
            raise ConfigError(f"unknown discriminator kind {k!r}")
    if not kinds:
        raise ConfigError("no discriminator kinds requested")
    return kinds


def cmd_crossval(args) -> int:
    cfg = _load_cfg(args)
    kinds = _parse_kinds(args.kinds, allow_fusion=True)
    want_fusion = "fusion" in kinds
    disc_kinds = [k for k in kinds if k != "fusion"]
    if want_fusion and set(disc_kinds) != set(discriminate.KINDS):
        raise ConfigError("fusion needs all four discriminators: ehd,lg,gprhog,sed,fusion")

    lanes = _load_lanes(args.lanes)
    alarms_by_lane = _alarms_for_lanes(args.alarms, lanes)
    out = _prepare_out_dir(args.out, args.force)
    manifest = _Manifest(out, dump_config(cfg), cfg.seed)
    manifest.add_inputs(*(str(p) for p in _lane_paths(args.lanes)), args.alarms)

    def run_kind(kind):
        folds = evaluate.cross_validate(lanes, alarms_by_lane, kind, cfg, cfg.seed)
        return kind, folds

    results = dict(_map_jobs(run_kind, disc_kinds, cfg.jobs))
    manifest.stage("cross_validation")

    # Merge per-kind fold rows (same alarms, same order) into one table.
    rows = None
    for kind in disc_kinds:
        kind_rows = evaluate.aggregate_rows(results[kind])
        if rows is None:
            rows = kind_rows
        else:
            for target, source in zip(rows, kind_rows):
                target.stats.update(source.stats)

    stat_keys = list(disc_kinds)
    if want_fusion:
        platt = discriminate.fit_fusion_platt(rows, lane_id=cfg.fusion_lane or None)
        discriminate.apply_fusion(rows, platt)
        stat_keys.append(_FUSED_KEY)
    manifest.stage("fusion")

    stats_path = out / "stats.csv"
    evaluate.write_stats_csv(rows, stats_path)
    manifest.add_output(stats_path)

    n_threats = sum(len(lane.truth) for lane in lanes)
    area = sum(lane.area_m2 for lane in lanes)
    curves = {}
    summaries = {}
    for key in stat_keys:
        curve = evaluate.roc_from_rows(rows, key, n_threats, area)
        curves[key] = curve.points
        roc_path = out / f"roc_{key}.csv"
        evaluate.write_roc_csv(curve, roc_path)
        manifest.add_output(roc_path)
        n_false = sum(1 for r in rows if not r.is_hit)
        summaries[key] = evaluate.roc_summary(curve, n_false)
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summaries, indent=2, sort_keys=True) + "\n")
    manifest.add_output(summary_path)

    svg_path = out / "roc.svg"
    write_roc_svg(curves, svg_path, truncate_y=args.truncate_y,
                  title="lane cross-validation ROC")
    manifest.add_output(svg_path)
    manifest.stage("scoring")
    manifest.write()
    for key, s in summaries.items():
        print(f"{key}: auc={s['auc']:.4f} max_pd={s['max_pd']:.4f}")
    return 0


def cmd_score(args) -> int:
    cfg = _load_cfg(args)
    rows = evaluate.read_stats_csv(args.stats)
    truth = []
    for path in args.truth:
        truth.extend(read_truth_csv(path))
    if truth:
        relabeled, _ = evaluate.label_alarms([r.alarm for r in rows], truth, cfg.halo_m)
        for r, la in zip(rows, relabeled):
            r.is_hit, r.threat = la.is_hit, la.threat
    out = _prepare_out_dir(args.out, args.force)
    manifest = _Manifest(out, dump_config(cfg), cfg.seed)
    manifest.add_inputs(args.stats, *args.truth)

    present = sorted({k for r in rows for k in r.stats})
    n_threats = len(truth) if truth else sum(1 for r in rows if r.is_hit)
    if n_threats == 0:
        raise DataError("no threats available for scoring")
    summaries = {}
    from .model import DepthCategory

    for key in present:
        scored = [r for r in rows if key in r.stats]
        curve = evaluate.roc_from_rows(scored, key, n_threats, args.area)
        evaluate.write_roc_csv(curve, out / f"roc_{key}.csv")
        manifest.add_output(out / f"roc_{key}.csv")
        summaries[key] = evaluate.roc_summary(curve, sum(1 for r in scored if not r.is_hit))
        for stratum in (DepthCategory.STANDARD, DepthCategory.DEEP):
            n_stratum = sum(1 for t in truth if t.depth_category is stratum)
            if n_stratum == 0:
                continue
            strat_curve = evaluate.stratified_roc(scored, stratum, key, n_stratum, args.area)
            evaluate.write_roc_csv(strat_curve, out / f"roc_{key}_{stratum.value}.csv")
            manifest.add_output(out / f"roc_{key}_{stratum.value}.csv")
            summaries[f"{key}_{stratum.value}"] = evaluate.roc_summary(strat_curve)
    (out / "summary.json").write_text(json.dumps(summaries, indent=2, sort_keys=True) + "\n")
    manifest.add_output(out / "summary.json")
    manifest.stage("score")
    manifest.write()
    print(json.dumps(summaries, indent=2, sort_keys=True))
    return 0


def cmd_fuse(args) -> int:
    rows = evaluate.read_stats_csv(args.stats)
    missing = [k for k in discriminate.KINDS if any(k not in r.stats for r in rows)]
    if missing:
        raise DataError(f"stats file missing discriminator columns: {missing}")
    platt = discriminate.fit_fusion_platt(rows, lane_id=args.lane or None)
    discriminate.apply_fusion(rows, platt)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    evaluate.write_stats_csv(rows, out_path)
    print(f"wrote fused statistics to {out_path}")
    return 0


def cmd_plot(args) -> int:
    curves = {}
    labels = args.labels.split(",") if args.labels else None
    paths = args.roc
    if labels and len(labels) != len(paths):
        raise ConfigError("need as many labels as ROC files")
    for i, path in enumerate(paths):
        curve = evaluate.read_roc_csv(path)
        label = labels[i] if labels else Path(path).stem
        curves[label] = curve.points
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_roc_svg(curves, out_path, truncate_y=args.truncate_y)
    print(f"wrote {out_path}")
    return 0


def cmd_config(args) -> int:
    cfg = _load_cfg(args)
    if args.dump:
        sys.stdout.write(dump_config(cfg))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gprbtd",
        description="two-stage buried-threat detection pipeline for GPR volumes",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="render synthetic lanes from a spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("prescreen", help="run F2 + CCY + fusion over lanes")
    p.add_argument("--lanes", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.set_defaults(fn=cmd_prescreen)

    p = sub.add_parser("extract", help="dump per-alarm features to CSV")
    p.add_argument("--lanes", required=True)
    p.add_argument("--alarms", required=True)
    p.add_argument("--kind", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_extract)

    p = sub.add_parser("train", help="train discriminators on all given lanes")
    p.add_argument("--lanes", required=True)
    p.add_argument("--alarms", required=True)
    p.add_argument("--kinds", default="ehd,lg,gprhog,sed")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("crossval", help="lane-based cross-validation + ROC artifacts")
    p.add_argument("--lanes", required=True)
    p.add_argument("--alarms", required=True)
    p.add_argument("--kinds", default="ehd,lg,gprhog,sed,fusion")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--truncate-y", action="store_true",
                   help="clip the pd axis to [0.5, 1] in the SVG plot")
    p.set_defaults(fn=cmd_crossval)

    p = sub.add_parser("score", help="ROC/AUC (plus depth strata) from a stats CSV")
    p.add_argument("--stats", required=True)
    p.add_argument("--truth", nargs="*", default=[])
    p.add_argument("--area", type=float, required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("fuse", help="add the Platt-product fusion column to a stats CSV")
    p.add_argument("--stats", required=True)
    p.add_argument("--lane", default="")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_fuse)

    p = sub.add_parser("plot", help="render ROC CSVs as an SVG figure")
    p.add_argument("--roc", nargs="+", required=True)
    p.add_argument("--labels", default="")
    p.add_argument("--out", required=True)
    p.add_argument("--truncate-y", action="store_true")
    p.set_defaults(fn=cmd_plot)

    p = sub.add_parser("config", help="print the effective configuration")
    p.add_argument("--config")
    p.add_argument("--dump", action="store_true")
    p.set_defaults(fn=cmd_config)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except GprError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # invariant violations and bugs
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

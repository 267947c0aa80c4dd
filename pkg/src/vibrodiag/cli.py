"""Command-line pipeline orchestration.

Every command reads/writes versioned artifacts under a working directory so
the full protocol (synthesize, featurize, train, detect, cluster, explain,
evaluate) can be replayed step by step. Exit codes: 0 success, 1 usage/config
error, 2 missing input artifact, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import cae, clustering, dsp, metrics, synthgen, xai
from . import io as vio
from .errors import MissingArtifact, NumericFailure, UsageError, VibrodiagError

DEFAULT_STREAM_SCHEDULE = [
    {"nSnD": 30},
    {"nSdD": 10, "hSnD": 10},
    {"nSdD": 10, "hSnD": 10},
    {"lSnD": 15, "lSdD": 15},
    {"lSnD": 15, "lSdD": 15},
]

DEFAULT_CONFIG = {
    "seed": 0,
    "workdir": "work",
    "manifest": None,  # defaults to <workdir>/dataset/manifest.json
    "sensors": None,  # channel-name subset; None keeps all channels
    "truncate_ms": 500,
    "mel": dsp.MelConfig().to_dict(),
    "train": cae.TrainConfig().to_dict(),
    "cluster_method": "kmeans",
    "k": 5,
    "xi": 0.05,
    # A coarser xi keeps the streamed cluster count from oscillating as
    # overlapping conditions accumulate.
    "stream_xi": 0.1,
    "optics_min_samples": 5,
    # The linear head needs a larger step size than the autoencoder.
    "classifier": {"lr": 0.05},
    "som": {"rows": 10, "cols": 10, "iterations": 5000},
    "ig_steps": 64,
    "fractions": [round(0.02 * i, 2) for i in range(16)],
    "synth_counts": {
        "train": {"nSnD": 60},
        "test": {"nSnD": 30, "nSdD": 30, "hSnD": 30, "lSnD": 30, "lSdD": 30},
    },
    "synth_duration_ms": 550,
    "sample_rate": 100000,
    "stream_schedule": DEFAULT_STREAM_SCHEDULE,
    "stream_method": "optics",
}


def load_config(args) -> dict:
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise MissingArtifact(f"config file not found: {path}")
        user = json.loads(path.read_text())
        for key, value in user.items():
            if isinstance(value, dict) and isinstance(cfg.get(key), dict):
                cfg[key].update(value)
            else:
                cfg[key] = value
    for flag in ("seed", "workdir", "k", "sensors", "method", "fractions", "steps"):
        value = getattr(args, flag, None)
        if value is not None:
            if flag == "method":
                cfg["cluster_method"] = value
            elif flag == "steps":
                cfg["ig_steps"] = value
            else:
                cfg[flag] = value
    if cfg.get("seed") is None:
        raise UsageError("a seed is mandatory (set in config or via --seed)")
    return cfg


def _workdir(cfg) -> Path:
    wd = Path(cfg["workdir"])
    wd.mkdir(parents=True, exist_ok=True)
    return wd


def _manifest_path(cfg) -> Path:
    if cfg["manifest"]:
        return Path(cfg["manifest"])
    return _workdir(cfg) / "dataset" / "manifest.json"


def _require(path: Path, produced_by: str) -> Path:
    if not Path(path).exists():
        raise MissingArtifact(f"missing artifact {path} (run `{produced_by}` first)")
    return Path(path)


def _check_finite(name: str, arr: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NumericFailure(f"NaN/Inf detected in {name}")
    return arr


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_synth(cfg) -> None:
    wd = _workdir(cfg)
    dataset_dir = wd / "dataset"
    dataset_dir.mkdir(exist_ok=True)
    entries = []
    for split, counts in cfg["synth_counts"].items():
        records = synthgen.generate_scenario(
            counts,
            sample_rate=cfg["sample_rate"],
            duration_ms=cfg["synth_duration_ms"],
            seed=cfg["seed"] + (0 if split == "train" else 1),
        )
        for rec in records:
            path = dataset_dir / f"{split}-{rec.record_id}.wav"
            vio.save_record_wav(path, rec)
            entries.append(
                {
                    "record_id": f"{split}-{rec.record_id}",
                    "path": str(path),
                    "sample_rate": rec.sample_rate,
                    "condition": rec.condition,
                    "split": split,
                    "channels": rec.channels,
                }
            )
    vio.save_manifest(_manifest_path(cfg), entries)
    print(f"wrote {len(entries)} records to {dataset_dir}")


def _subset_channels(record, sensors):
    if not sensors:
        return record
    missing = [s for s in sensors if s not in record.channels]
    if missing:
        raise UsageError(f"sensors {missing} not present in record {record.record_id}")
    idx = [record.channels.index(s) for s in sensors]
    from dataclasses import replace

    return replace(record, channels=list(sensors), samples=record.samples[:, idx])


def cmd_featurize(cfg) -> None:
    wd = _workdir(cfg)
    entries = vio.load_manifest(_require(_manifest_path(cfg), "synth"))
    mel_cfg = dsp.MelConfig.from_dict(cfg["mel"])
    spec_dir = wd / "spectrograms"
    spec_dir.mkdir(exist_ok=True)

    specs = {}
    meta = []
    for entry in entries:
        record = _subset_channels(vio.load_record(entry), cfg["sensors"])
        record = dsp.truncate(record, cfg["truncate_ms"])
        spec = dsp.mel_spectrogram(record, mel_cfg)
        _check_finite(f"spectrogram {entry['record_id']}", spec.data)
        specs[entry["record_id"]] = spec
        meta.append(entry)

    train_specs = [specs[e["record_id"]] for e in meta if e.get("split") == "train"]
    if not train_specs:
        raise UsageError("manifest has no records with split == 'train'")
    stats = dsp.fit_normalizer(train_specs)

    for entry in meta:
        spec = dsp.normalize(specs[entry["record_id"]], stats)
        vio.save_tensor(spec_dir / f"{entry['record_id']}.cbs", spec.data)
    sidecar = {
        "mel": mel_cfg.to_dict(),
        "sensors": cfg["sensors"],
        "truncate_ms": cfg["truncate_ms"],
        "norm_stats": stats.tolist(),
        "records": [
            {
                "record_id": e["record_id"],
                "condition": e.get("condition"),
                "split": e.get("split"),
            }
            for e in meta
        ],
    }
    (spec_dir / "features.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    print(f"wrote {len(meta)} spectrograms to {spec_dir}")


def _load_features(cfg):
    wd = _workdir(cfg)
    spec_dir = wd / "spectrograms"
    sidecar_path = _require(spec_dir / "features.json", "featurize")
    sidecar = json.loads(sidecar_path.read_text())
    specs = {}
    for rec in sidecar["records"]:
        data = vio.load_tensor(spec_dir / f"{rec['record_id']}.cbs")
        specs[rec["record_id"]] = dsp.MelSpectrogram(
            data=data,
            record_id=rec["record_id"],
            condition=rec.get("condition"),
            norm_stats=np.asarray(sidecar["norm_stats"]),
        )
    return sidecar, specs


def _split_ids(sidecar, split):
    return [r["record_id"] for r in sidecar["records"] if r.get("split") == split]


def cmd_train_cae(cfg) -> None:
    wd = _workdir(cfg)
    sidecar, specs = _load_features(cfg)
    train_ids = _split_ids(sidecar, "train")
    train_cfg = cae.TrainConfig.from_dict({**cfg["train"], "seed": cfg["seed"]})
    model, history = cae.train_cae([specs[i] for i in train_ids], train_cfg)
    model.save(wd / "cae_manifest.json", wd / "cae_weights.bin")
    (wd / "cae_history.json").write_text(json.dumps(history, indent=2) + "\n")
    print(
        f"trained CAE: best epoch {history['best_epoch']}, "
        f"stopped at {history['stopped_epoch']}"
    )


def _load_cae(cfg) -> cae.CaeModel:
    wd = _workdir(cfg)
    return cae.CaeModel.load(
        _require(wd / "cae_manifest.json", "train-cae"),
        _require(wd / "cae_weights.bin", "train-cae"),
    )


def cmd_detect(cfg) -> None:
    wd = _workdir(cfg)
    model = _load_cae(cfg)
    sidecar, specs = _load_features(cfg)
    train_ids = _split_ids(sidecar, "train")

    residuals = {}
    for rid, spec in specs.items():
        recon = cae.reconstruct(model, spec)
        residuals[rid] = cae.residual_mean(spec, recon)
    tau, mu, sigma = cae.fit_threshold([residuals[i] for i in train_ids])

    rows = []
    for rec in sidecar["records"]:
        rid = rec["record_id"]
        r = residuals[rid]
        _check_finite(f"residual {rid}", np.array([r]))
        rows.append(
            [rid, f"{r:.10g}", f"{tau:.10g}", str(r >= tau).lower(), rec.get("condition") or ""]
        )
    vio.write_csv(
        wd / "detections.csv",
        ["record_id", "residual_mean", "threshold", "is_fault", "condition"],
        rows,
    )
    (wd / "threshold.json").write_text(
        json.dumps({"tau": tau, "mu": mu, "sigma": sigma}, indent=2) + "\n"
    )
    print(f"tau={tau:.6g}; wrote {wd / 'detections.csv'}")


def _encode_split(cfg, split="test"):
    model = _load_cae(cfg)
    sidecar, specs = _load_features(cfg)
    ids = _split_ids(sidecar, split)
    x = np.stack([specs[i].data for i in ids])
    z = _check_finite("latents", cae.encode_batch(model, x))
    conditions = [specs[i].condition for i in ids]
    return ids, z, conditions, model, specs


def _save_latents(cfg, ids, z):
    wd = _workdir(cfg)
    np.save(wd / "latents.npy", z)
    vio.write_csv(wd / "latent_ids.csv", ["record_id"], [[i] for i in ids])


def _load_latents(cfg):
    wd = _workdir(cfg)
    z = np.load(_require(wd / "latents.npy", "cluster"))
    with open(_require(wd / "latent_ids.csv", "cluster")) as fh:
        ids = [line.strip() for line in fh.readlines()[1:] if line.strip()]
    return ids, z


def _pca_2d(z: np.ndarray) -> np.ndarray:
    centered = z - z.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    return centered @ vt[:2].T


def cmd_cluster(cfg) -> None:
    wd = _workdir(cfg)
    ids, z, conditions, _, _ = _encode_split(cfg)
    _save_latents(cfg, ids, z)
    method = cfg["cluster_method"]

    if method == "kmeans":
        labels, centroids, inertia = clustering.kmeans(z, cfg["k"], seed=cfg["seed"])
        np.save(wd / "kmeans_centroids.npy", centroids)
    elif method == "optics":
        result = clustering.optics(
            z, min_samples=cfg["optics_min_samples"], xi=cfg["xi"]
        )
        labels = result.labels
    elif method == "som":
        som_cfg = cfg["som"]
        som = clustering.som_fit(
            z, clustering.SomMap(**som_cfg), seed=cfg["seed"]
        )
        labels = clustering.som_assign(som, z)
        np.save(wd / "som_codebook.npy", som.codebook)
        vio.write_csv(
            wd / "som_umatrix.csv",
            [f"c{j}" for j in range(som.cols)],
            clustering.som_umatrix(som).tolist(),
        )
    else:
        raise UsageError(f"unknown clustering method {method!r}")

    rows = [[rid, method, int(lbl)] for rid, lbl in zip(ids, labels)]
    vio.write_csv(wd / "assignments.csv", ["record_id", "method", "cluster"], rows)

    xy = _pca_2d(z)
    vio.write_csv(
        wd / "latents_pca.csv",
        ["record_id", "pc1", "pc2", "cluster", "condition"],
        [
            [rid, f"{p[0]:.6g}", f"{p[1]:.6g}", int(lbl), cond or ""]
            for rid, p, lbl, cond in zip(ids, xy, labels, conditions)
        ],
    )
    n_clusters = len(set(int(v) for v in labels if v >= 0))
    print(f"{method}: {n_clusters} clusters; wrote {wd / 'assignments.csv'}")


def cmd_elbow(cfg) -> None:
    wd = _workdir(cfg)
    ids, z, _, _, _ = _encode_split(cfg)
    k_range = list(range(1, min(cfg.get("elbow_max_k", 10), len(ids)) + 1))
    curve, knee = clustering.kmeans_elbow(z, k_range, seed=cfg["seed"])
    vio.write_csv(
        wd / "elbow.csv",
        ["k", "inertia"],
        [[k, f"{v:.10g}"] for k, v in curve],
    )
    (wd / "elbow.json").write_text(
        json.dumps({"curve": curve, "knee_suggestion": knee}, indent=2) + "\n"
    )
    print(f"knee suggestion: {knee}")


def cmd_stream_cluster(cfg) -> None:
    wd = _workdir(cfg)
    model = _load_cae(cfg)
    sidecar, specs = _load_features(cfg)

    # Pool test records by condition, then replay the configured schedule.
    by_cond: dict[str, list] = {}
    for rec in sidecar["records"]:
        if rec.get("split") == "test":
            by_cond.setdefault(rec.get("condition"), []).append(rec["record_id"])

    method = cfg["stream_method"]
    params = (
        {
            "min_samples": cfg["optics_min_samples"],
            "xi": cfg.get("stream_xi", cfg["xi"]),
        }
        if method == "optics"
        else dict(cfg["som"])
    )
    state = clustering.StreamState(method=method, params=params, seed=cfg["seed"])
    used: dict[str, int] = {}
    rows = []
    for step, batch_spec in enumerate(cfg["stream_schedule"], start=1):
        batch_ids = []
        for cond, count in batch_spec.items():
            pool = by_cond.get(cond, [])
            start = used.get(cond, 0)
            take = pool[start : start + count]
            if len(take) < count:
                raise UsageError(
                    f"stream schedule step {step} needs {count} {cond!r} test "
                    f"records, only {len(take)} left"
                )
            used[cond] = start + count
            batch_ids.extend(take)
        batch_z = cae.encode_batch(
            model, np.stack([specs[i].data for i in batch_ids])
        )
        clustering.stream_cluster(state, batch_z, batch_ids)
        snap = state.snapshots[-1]
        rows.append([snap.step, snap.n_samples, snap.n_clusters])
        vio.write_csv(
            wd / f"stream_assignments_step{snap.step}.csv",
            ["record_id", "method", "cluster"],
            [
                [rid, method, int(lbl)]
                for rid, lbl in zip(state.record_ids, snap.labels)
            ],
        )
    vio.write_csv(wd / "stream_trajectory.csv", ["step", "n_samples", "n_clusters"], rows)
    print("cluster-count trajectory:", [r[2] for r in rows])


def _load_assignments(cfg):
    wd = _workdir(cfg)
    path = _require(wd / "assignments.csv", "cluster")
    ids, methods, labels = [], [], []
    with open(path) as fh:
        next(fh)
        for line in fh:
            rid, method, lbl = line.strip().split(",")
            ids.append(rid)
            methods.append(method)
            labels.append(int(lbl))
    return ids, methods[0] if methods else "", np.array(labels)


def cmd_train_classifier(cfg) -> None:
    wd = _workdir(cfg)
    ids, z = _load_latents(cfg)
    a_ids, method, labels = _load_assignments(cfg)
    if a_ids != ids:
        raise UsageError("assignments and latents cover different records")
    keep = labels >= 0  # outliers carry no pseudo-label
    # Relabel to contiguous ids (SOM cell indices are sparse).
    uniq = sorted(set(labels[keep].tolist()))
    remap = {old: new for new, old in enumerate(uniq)}
    y = np.array([remap[v] for v in labels[keep]])
    train_cfg = cae.TrainConfig.from_dict(
        {**cfg["train"], **cfg.get("classifier", {}), "seed": cfg["seed"]}
    )
    head, history = xai.train_classifier(z[keep], y, train_cfg)
    np.save(wd / "classifier_weights.npy", head.weights)
    (wd / "classifier.json").write_text(
        json.dumps(
            {
                "n_classes": head.n_classes,
                "latent_dim": head.latent_dim,
                "label_map": {str(k): v for k, v in remap.items()},
                "history": history,
            },
            indent=2,
        )
        + "\n"
    )
    print(f"classifier trained on {int(keep.sum())} samples, K={head.n_classes}")


def _load_classifier(cfg) -> xai.ClassifierHead:
    wd = _workdir(cfg)
    meta = json.loads(_require(wd / "classifier.json", "train-classifier").read_text())
    w = np.load(_require(wd / "classifier_weights.npy", "train-classifier"))
    head = xai.ClassifierHead(n_classes=meta["n_classes"], latent_dim=meta["latent_dim"])
    head.dense.w[...] = w
    head.trained = True
    return head


def _healthy_baseline(cfg, sidecar, specs):
    train_ids = _split_ids(sidecar, "train")
    return xai.healthy_baseline([specs[i] for i in train_ids])


def cmd_explain(cfg) -> None:
    wd = _workdir(cfg)
    model = _load_cae(cfg)
    head = _load_classifier(cfg)
    sidecar, specs = _load_features(cfg)
    ids, z = _load_latents(cfg)
    _, method, labels = _load_assignments(cfg)
    explainer = xai.ClusterExplainer(model, head)
    baseline = _healthy_baseline(cfg, sidecar, specs)

    centroids = None
    if method == "kmeans" and (wd / "kmeans_centroids.npy").exists():
        centroids = np.load(wd / "kmeans_centroids.npy")
    reps = xai.cluster_representatives(z, labels, centroids)

    explain_dir = wd / "explanations"
    explain_dir.mkdir(exist_ok=True)
    summary = []
    for cluster, idx in reps.items():
        rid = ids[idx]
        x = specs[rid].data
        attr = xai.integrated_gradients(
            explainer, x, baseline.data, steps=cfg["ig_steps"]
        )
        _check_finite(f"attribution {rid}", attr.data)
        diag = xai.diagnostics_matrix(attr)
        diff = xai.diff_spectrogram(specs[rid], baseline)
        vio.save_tensor(explain_dir / f"cluster{cluster}_attribution.cbs", attr.data)
        vio.save_tensor(explain_dir / f"cluster{cluster}_diff.cbs", diff)
        vio.save_tensor(explain_dir / f"cluster{cluster}_diagnostics.cbs", diag.data)
        for c in range(attr.data.shape[2]):
            vio.save_pgm(
                explain_dir / f"cluster{cluster}_attribution_ch{c}.pgm",
                attr.data[:, :, c],
            )
        vio.write_csv(
            explain_dir / f"cluster{cluster}_diagnostics_ch0.csv",
            [f"t{j}" for j in range(diag.data.shape[1])],
            diag.data[:, :, 0].tolist(),
        )
        summary.append(
            {"cluster": cluster, "record_id": rid, "target_class": attr.target_class}
        )
    (explain_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"explained {len(reps)} cluster representatives into {explain_dir}")


def cmd_faithfulness(cfg) -> None:
    wd = _workdir(cfg)
    model = _load_cae(cfg)
    head = _load_classifier(cfg)
    sidecar, specs = _load_features(cfg)
    ids, z = _load_latents(cfg)
    _, _, labels = _load_assignments(cfg)
    explainer = xai.ClusterExplainer(model, head)
    baseline = _healthy_baseline(cfg, sidecar, specs)

    keep = [i for i, lbl in enumerate(labels) if lbl >= 0]
    xs = [specs[ids[i]].data for i in keep]
    attrs = [
        xai.integrated_gradients(explainer, x, baseline.data, steps=cfg["ig_steps"])
        for x in xs
    ]
    rows = []
    for mode in ("attribution", "random"):
        curve = xai.faithfulness_curve(
            explainer,
            xs,
            attrs,
            cfg["fractions"],
            mode=mode,
            seed=cfg["seed"],
            occlusion=baseline.data,
        )
        rows.extend([[f"{f:.2f}", mode, f"{d:.10g}"] for f, d in curve])
    vio.write_csv(wd / "faithfulness.csv", ["fraction", "mode", "mean_delta"], rows)
    print(f"wrote {wd / 'faithfulness.csv'} over {len(xs)} samples")


def cmd_evaluate(cfg, contingency_path=None) -> None:
    wd = _workdir(cfg)
    if contingency_path:
        table = json.loads(_require(Path(contingency_path), "evaluate").read_text())
        counts = np.asarray(table["counts"], dtype=np.int64)
        t = metrics.ContingencyTable(
            counts=counts,
            row_labels=table.get("rows", list(range(counts.shape[0]))),
            col_labels=table.get("cols", list(range(counts.shape[1]))),
        )
        h, c, v = metrics.homogeneity_completeness_v(t)
        report = {
            "ari": metrics.adjusted_rand_index(t),
            "homogeneity": h,
            "completeness": c,
            "v_measure": v,
        }
        print(json.dumps(report, indent=2))
        return

    sidecar, _ = _load_features(cfg)
    ids, method, labels = _load_assignments(cfg)
    cond_by_id = {r["record_id"]: r.get("condition") for r in sidecar["records"]}
    truth = [cond_by_id[i] for i in ids]
    report = metrics.clustering_report(truth, list(labels))
    report["method"] = method

    if method == "som" and (wd / "som_codebook.npy").exists():
        som = clustering.SomMap(**cfg["som"])
        som.codebook = np.load(wd / "som_codebook.npy")
        som.rows, som.cols = som.codebook.shape[:2]
        _, z = _load_latents(cfg)
        report["som"] = {
            "quantization_error": metrics.som_quantization_error(som, z),
            "topographic_error": metrics.som_topographic_error(som, z),
            "topographic_product": metrics.som_topographic_product(som),
        }
    (wd / "evaluation.json").write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps({k: v for k, v in report.items() if k != "confusion_matrix"}, indent=2))


def cmd_report(cfg) -> None:
    wd = _workdir(cfg)
    report = {}
    for name in ("threshold.json", "evaluation.json", "cae_history.json", "elbow.json"):
        path = wd / name
        if path.exists():
            report[name.replace(".json", "")] = json.loads(path.read_text())
    detections = wd / "detections.csv"
    if detections.exists():
        with open(detections) as fh:
            lines = fh.readlines()[1:]
        flagged = sum(1 for ln in lines if ln.strip().split(",")[3] == "true")
        report["detection"] = {"records": len(lines), "flagged": flagged}
    (wd / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"wrote {wd / 'report.json'}")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

COMMANDS = {
    "synth": cmd_synth,
    "featurize": cmd_featurize,
    "train-cae": cmd_train_cae,
    "detect": cmd_detect,
    "cluster": cmd_cluster,
    "stream-cluster": cmd_stream_cluster,
    "elbow": cmd_elbow,
    "train-classifier": cmd_train_classifier,
    "explain": cmd_explain,
    "faithfulness": cmd_faithfulness,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vibrodiag",
        description="Unsupervised fault detection, segmentation, and "
        "XAI-guided diagnostics for vibro-acoustic recordings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workdir", default=None)
        p.add_argument("--method", choices=["kmeans", "optics", "som"], default=None)
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--sensors", nargs="+", default=None)
        p.add_argument("--fractions", type=float, nargs="+", default=None)
        p.add_argument("--steps", type=int, default=None, help="IG steps")
        if name == "evaluate":
            p.add_argument("--contingency", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "evaluate":
            cmd_evaluate(cfg, contingency_path=args.contingency)
        else:
            COMMANDS[args.command](cfg)
        return 0
    except MissingArtifact as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (UsageError, VibrodiagError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

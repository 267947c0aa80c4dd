"""Fault detection and segmentation on a compact synthetic scenario.

Generates healthy and faulty switching-operation recordings, trains the
convolutional autoencoder on healthy data only, flags faults by
reconstruction residual, and segments the flagged records by clustering
the 80-dim latent features. Runs in about a minute on a laptop CPU.
"""
import numpy as np

from vibrodiag import cae, clustering, dsp, metrics, synthgen

TRAIN_HEALTHY = 16
TEST_PER_CONDITION = 6

print("== 1. synthesize recordings ==")
train_recs = synthgen.generate_scenario({"nSnD": TRAIN_HEALTHY}, seed=0)
test_recs, truth = [], []
for cond in synthgen.CONDITION_NAMES:
    test_recs += synthgen.generate_scenario({cond: TEST_PER_CONDITION}, seed=1)
    truth += [cond] * TEST_PER_CONDITION
print(f"{len(train_recs)} healthy train records, {len(test_recs)} test records")
print(f"each record: {train_recs[0].samples.shape[0]} samples x "
      f"{train_recs[0].channels}")

print("\n== 2. log-Mel spectrograms ==")
mel = dsp.MelConfig()
raw_train = [dsp.mel_spectrogram(dsp.truncate(r, 500), mel) for r in train_recs]
stats = dsp.fit_normalizer(raw_train)  # min-max per channel, train split only
train_specs = [dsp.normalize(s, stats) for s in raw_train]
test_specs = [
    dsp.normalize(dsp.mel_spectrogram(dsp.truncate(r, 500), mel), stats)
    for r in test_recs
]
print(f"spectrogram shape: {train_specs[0].data.shape} (bands x frames x channels)")

print("\n== 3. train the autoencoder on healthy data only ==")
model, history = cae.train_cae(
    train_specs, cae.TrainConfig(max_epochs=40, patience=10)
)
print(f"stopped at epoch {history['stopped_epoch']}, "
      f"best val loss {min(history['val_loss']):.5f}")

print("\n== 4. residual threshold and detection ==")
x_train = np.stack([s.data for s in train_specs])
residuals = np.abs(x_train - cae.reconstruct_batch(model, x_train)).mean(axis=(1, 2, 3))
tau, mu, sigma = cae.fit_threshold(list(residuals))
print(f"tau = mu + 3 sigma = {mu:.5f} + 3 x {sigma:.5f} = {tau:.5f}")

x_test = np.stack([s.data for s in test_specs])
r_test = np.abs(x_test - cae.reconstruct_batch(model, x_test)).mean(axis=(1, 2, 3))
flags = r_test >= tau
truth_arr = np.array(truth)
for cond in synthgen.CONDITION_NAMES:
    m = truth_arr == cond
    print(f"  {cond}: mean residual {r_test[m].mean():.5f}, "
          f"flagged {int(flags[m].sum())}/{int(m.sum())}")
faulty = truth_arr != "nSnD"
print(f"detection rate {flags[faulty].mean():.2%}, "
      f"false alarms {flags[~faulty].mean():.2%}")

print("\n== 5. segment faults by clustering the latent features ==")
latents = cae.encode_batch(model, x_test)
print(f"latents: {latents.shape}")

labels, _, inertia = clustering.kmeans(latents, k=5, seed=0)
report = metrics.clustering_report(truth, labels.tolist())
print(f"K-means K=5: ARI {report['ari']:.3f}, "
      f"homogeneity {report['homogeneity']:.3f}, v {report['v_measure']:.3f}")

res = clustering.optics(latents, min_samples=5, xi=0.05)
print(f"OPTICS: {res.n_clusters} clusters, "
      f"{int((res.labels == clustering.OUTLIER).sum())} outliers")

som = clustering.som_fit(latents, clustering.SomMap(rows=10, cols=10), seed=0)
cells = clustering.som_assign(som, latents)
h, _, _ = metrics.homogeneity_completeness_v(metrics.contingency(truth, cells.tolist()))
print(f"SOM 10x10: homogeneity {h:.3f} (occupied cells as clusters), "
      f"QE {metrics.som_quantization_error(som, latents):.4f}")

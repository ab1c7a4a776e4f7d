#!/usr/bin/env python3
"""Builds the bundled MNIST subset and the fixture MLP under data/.

Source: the 5,000-sample MNIST extract shipped inside the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz, 784 pixel columns followed by the label).

  pip download mlxtend --no-deps -d /tmp/mlx
  python3 -c "import zipfile; z = zipfile.ZipFile('/tmp/mlx/mlxtend-0.24.0-py3-none-any.whl'); \
      open('/tmp/mnist_5k.csv.gz', 'wb').write(z.read('mlxtend/data/data/mnist_5k.csv.gz'))"
  python3 tools/make_fixture.py --csv /tmp/mnist_5k.csv.gz --out data

Outputs:
  mnist1k-images.idx3, mnist1k-labels.idx1   1,000 held-out samples (100 per class)
  mlp.snnx.json, mlp.bin                     784-64-32-10 ReLU MLP trained on the other 4,000

Hidden activations are rescaled layer by layer (ReLU is positively homogeneous,
so the argmax is unchanged) so that each hidden layer peaks at --peak on the
training pool. This keeps single-spike-per-step rate coding out of saturation
at the default thresholds.
"""

import argparse
import gzip
import json
import os
import struct

import numpy as np
import torch
from torch import nn


def write_idx(path, array, magic):
    with open(path, "wb") as f:
        f.write(struct.pack(">I", magic))
        for dim in array.shape:
            f.write(struct.pack(">I", dim))
        f.write(array.astype(np.uint8).tobytes())


def write_snnx(manifest_path, layers, input_size):
    blob_name = os.path.splitext(os.path.splitext(os.path.basename(manifest_path))[0])[0] + ".bin"
    blob = bytearray()
    entries = []
    for name, w, b in layers:
        tensors = []
        for role, t in (("weight", w), ("bias", b)):
            data = np.ascontiguousarray(t, dtype="<f4").tobytes()
            tensors.append({"role": role, "shape": list(t.shape), "dtype": "<f4",
                            "offset": len(blob), "length": len(data)})
            blob += data
        entries.append({"name": name, "kind": "dense", "in_features": int(w.shape[1]),
                        "out_features": int(w.shape[0]), "tensors": tensors})
    manifest = {"format": "SNNX", "version": 1, "blob": blob_name,
                "input_shape": [input_size], "layers": entries}
    with open(os.path.join(os.path.dirname(manifest_path), blob_name), "wb") as f:
        f.write(blob)
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--csv", required=True)
    ap.add_argument("--out", default="data")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--peak", type=float, default=0.3)
    ap.add_argument("--epochs", type=int, default=60)
    args = ap.parse_args()

    raw = np.loadtxt(gzip.open(args.csv, "rt"), delimiter=",", dtype=np.int64)
    pixels, labels = raw[:, :-1], raw[:, -1]
    rng = np.random.default_rng(args.seed)

    held = []
    for digit in range(10):
        idx = np.flatnonzero(labels == digit)
        held.extend(rng.choice(idx, 100, replace=False))
    held = rng.permutation(np.array(held))
    train = np.setdiff1d(np.arange(len(labels)), held)

    os.makedirs(args.out, exist_ok=True)
    write_idx(os.path.join(args.out, "mnist1k-images.idx3"),
              pixels[held].reshape(-1, 28, 28), 0x00000803)
    write_idx(os.path.join(args.out, "mnist1k-labels.idx1"), labels[held], 0x00000801)

    torch.manual_seed(args.seed)
    x_train = torch.tensor(pixels[train] / 255.0, dtype=torch.float32)
    y_train = torch.tensor(labels[train])
    x_held = torch.tensor(pixels[held] / 255.0, dtype=torch.float32)
    y_held = torch.tensor(labels[held])

    model = nn.Sequential(nn.Linear(784, 64), nn.ReLU(), nn.Dropout(0.2),
                          nn.Linear(64, 32), nn.ReLU(), nn.Dropout(0.2),
                          nn.Linear(32, 10))
    opt = torch.optim.Adam(model.parameters(), lr=1e-3, weight_decay=1e-4)
    loss_fn = nn.CrossEntropyLoss()
    for _ in range(args.epochs):
        model.train()
        perm = torch.randperm(len(x_train))
        for i in range(0, len(perm), 64):
            batch = perm[i:i + 64]
            opt.zero_grad()
            loss_fn(model(x_train[batch]), y_train[batch]).backward()
            opt.step()
    model.eval()

    linears = [m for m in model if isinstance(m, nn.Linear)]
    weights = [l.weight.detach().double().numpy() for l in linears]
    biases = [l.bias.detach().double().numpy() for l in linears]

    # Per-layer peak activation on the training pool, original scale.
    peaks = []
    act = x_train.double().numpy()
    for w, b in zip(weights[:-1], biases[:-1]):
        act = np.maximum(act @ w.T + b, 0.0)
        peaks.append(act.max())
    factors = [args.peak / p for p in peaks] + [1.0]
    prev = 1.0
    for i, f in enumerate(factors):
        weights[i] = weights[i] * f / prev
        biases[i] = biases[i] * f
        prev = f

    def forward(x):
        acts = []
        for w, b in zip(weights[:-1], biases[:-1]):
            x = np.maximum(x @ w.T + b, 0.0)
            acts.append(x)
        return x @ weights[-1].T + biases[-1], acts

    logits, acts = forward(x_held.double().numpy())
    acc = (logits.argmax(1) == y_held.numpy()).mean()
    print(f"held-out accuracy {acc:.4f}; held-out hidden peaks",
          [float(a.max()) for a in acts])

    layers = [(f"fc{i + 1}", w.astype(np.float32), b.astype(np.float32))
              for i, (w, b) in enumerate(zip(weights, biases))]
    write_snnx(os.path.join(args.out, "mlp.snnx.json"), layers, 784)


if __name__ == "__main__":
    main()

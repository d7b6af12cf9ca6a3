# Copyright 2026 The qfeedback Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Plots the CSV outputs of `qfb train`, `qfb eval` and `qfb compare`.

Usage: plot_figures.py RUN_DIR [--out DIR]

Any figure whose inputs are missing from RUN_DIR is skipped.
"""

import argparse
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def plot_training(run: pathlib.Path, out: pathlib.Path) -> None:
    path = run / "train_stats.csv"
    if not path.exists():
        return
    stats = pd.read_csv(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(stats["iteration"], stats["mean_cost"], label="mean cost")
    ax.plot(stats["iteration"], stats["best_cost"], label="best cost", alpha=0.7)
    ax.set_xlabel("iteration")
    ax.set_ylabel("cost")
    tested = stats.dropna(subset=["test_fidelity"])
    if not tested.empty:
        ax2 = ax.twinx()
        ax2.plot(tested["iteration"], tested["test_fidelity"], "k.--", label="test fidelity")
        ax2.set_ylabel("test fidelity")
        ax2.set_ylim(0, 1)
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(out / "training.png", dpi=150)
    plt.close(fig)


def plot_basis(run: pathlib.Path, out: pathlib.Path) -> None:
    arms = [(name, run / f"compare_basis_{name}.csv") for name in ("trained", "baseline")]
    arms = [(name, p) for name, p in arms if p.exists()]
    if not arms and (run / "eval_basis.csv").exists():
        arms = [("eval", run / "eval_basis.csv")]
    if not arms:
        return
    frames = {name: pd.read_csv(p) for name, p in arms}
    labels = [c[: -len("_mean")] for c in next(iter(frames.values())).columns if c.endswith("_mean")]
    cols = 4
    rows = (len(labels) + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(3 * cols, 2.2 * rows), sharex=True, squeeze=False)
    for ax, label in zip(axes.flat, labels):
        for name, df in frames.items():
            mean = df[f"{label}_mean"]
            band = df[f"{label}_2sigma"]
            ax.plot(df["time"], mean, label=name)
            ax.fill_between(df["time"], mean - band, mean + band, alpha=0.2)
        ax.set_title(label, fontsize=9)
        ax.set_ylim(-1.1, 1.1)
    for ax in list(axes.flat)[len(labels):]:
        ax.axis("off")
    axes.flat[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out / "basis_expectations.png", dpi=150)
    plt.close(fig)


def plot_costs(run: pathlib.Path, out: pathlib.Path) -> None:
    path = run / "compare_costs.csv"
    if not path.exists():
        path = run / "eval_costs.csv"
    if not path.exists():
        return
    df = pd.read_csv(path)
    arms = sorted({c.split("_J")[0] for c in df.columns if "_J" in c})
    fig, (ax_s, ax_c) = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
    for arm in arms:
        for ax, part in ((ax_s, "Jstate"), (ax_c, "Jcontrol")):
            mean = df[f"{arm}_{part}_mean"]
            band = df[f"{arm}_{part}_1sigma"]
            ax.plot(df["time"], mean, label=arm)
            ax.fill_between(df["time"], mean - band, mean + band, alpha=0.2)
    ax_s.set_ylabel("cumulative state cost")
    ax_c.set_ylabel("cumulative control cost")
    for ax in (ax_s, ax_c):
        ax.set_xlabel("time")
        ax.legend()
    fig.tight_layout()
    fig.savefig(out / "cumulative_costs.png", dpi=150)
    plt.close(fig)


def plot_fidelity(run: pathlib.Path, out: pathlib.Path) -> None:
    path = run / "eval_fidelity.csv"
    if not path.exists():
        return
    df = pd.read_csv(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(df["time"], df["fidelity_mean"])
    ax.fill_between(df["time"], df["fidelity_mean"] - df["fidelity_1sigma"],
                    (df["fidelity_mean"] + df["fidelity_1sigma"]).clip(upper=1.0), alpha=0.2)
    ax.set_xlabel("time")
    ax.set_ylabel("fidelity to target")
    ax.set_ylim(0, 1.02)
    fig.tight_layout()
    fig.savefig(out / "fidelity.png", dpi=150)
    plt.close(fig)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("run_dir", type=pathlib.Path)
    parser.add_argument("--out", type=pathlib.Path, default=None)
    args = parser.parse_args()
    out = args.out or args.run_dir / "figures"
    out.mkdir(parents=True, exist_ok=True)
    for plot in (plot_training, plot_basis, plot_costs, plot_fidelity):
        plot(args.run_dir, out)


if __name__ == "__main__":
    main()

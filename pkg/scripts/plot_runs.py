#!/usr/bin/env python3
"""Render standard figures from mlkr run directories.

Looks inside each given directory for the known CSV artifacts and writes one
PNG per artifact into --out. Convenience only; nothing here is needed to
produce or validate the data.

    python3 scripts/plot_runs.py runs/classical runs/quantum --out figures/
"""

import argparse
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def tag_for(run_dir):
    manifest = os.path.join(run_dir, "manifest.json")
    if os.path.exists(manifest):
        cfg = json.load(open(manifest))["config"]
        return f"K={cfg['K']}, k_p={cfg['k_p']}"
    return os.path.basename(os.path.abspath(run_dir))


def save(fig, out_dir, run_dir, name):
    base = os.path.basename(os.path.abspath(run_dir))
    path = os.path.join(out_dir, f"{base}_{name}.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    print(path)


def plot_energy(path, out_dir, run_dir, tag):
    d = load_csv(path)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(d["t"], d["E_mean"], lw=0.8)
    ax1.set(xlabel="t (kicks)", ylabel=r"$\langle E \rangle$", title=tag)
    live = d["E_mean"] > 0
    ax2.loglog(d["t"][live], d["E_mean"][live], lw=0.8)
    ax2.set(xlabel="t (kicks)", ylabel=r"$\langle E \rangle$ (log-log)")
    save(fig, out_dir, run_dir, "energy")


def plot_histogram(path, out_dir, run_dir, tag, name):
    d = load_csv(path)
    mids = 0.5 * (d["p_lo"] + d["p_hi"])
    occupied = d["density"] > 0
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(mids[occupied], d["density"][occupied], lw=0.8)
    ax.set(xlabel="p", ylabel="f(p)", title=tag)
    save(fig, out_dir, run_dir, name)


def plot_section(path, out_dir, run_dir, tag):
    d = load_csv(path)
    fig, ax = plt.subplots(figsize=(5, 4))
    for traj in np.unique(d["traj_id"]):
        sel = d["traj_id"] == traj
        ax.plot(d["x1"][sel], d["p1"][sel], ".", ms=0.5)
    ax.set(xlabel=r"$x_1$", ylabel=r"$p_1$", xlim=(0, 2 * np.pi), title=tag)
    save(fig, out_dir, run_dir, "section")


def plot_lyapunov(path, out_dir, run_dir, tag):
    d = np.atleast_1d(load_csv(path))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.errorbar(d["Ks"], d["lambda_map"], yerr=d["stderr"], fmt="o", ms=4, label="map")
    ax.plot(d["Ks"], d["lambda_jprod"], "s", ms=4, label="Jacobian product")
    ax.plot(d["Ks"], d["lambda_analytic"], "--", label=r"$\ln K_s$")
    ax.set(xscale="log", xlabel=r"$K_s$", ylabel=r"$\lambda_{\max}$", title=tag)
    ax.legend()
    save(fig, out_dir, run_dir, "lyapunov")


def plot_phase_diagram(path, out_dir, run_dir, tag):
    d = load_csv(path)
    K = np.unique(d["K"])
    kp = np.unique(d["k_p"])
    beta = np.full((K.size, kp.size), np.nan)
    for row in d:
        i = np.searchsorted(K, row["K"])
        j = np.searchsorted(kp, row["k_p"])
        beta[i, j] = row["beta"]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    mesh = ax.pcolormesh(kp, K, beta, shading="nearest", vmin=0, vmax=1.2)
    ax.plot(kp, 1 / kp, "b-", lw=1)  # Ks = 1 boundary
    ax.set(xscale="log", yscale="log", xlabel=r"$k_p$", ylabel="K",
           ylim=(K.min(), K.max()), title=tag)
    fig.colorbar(mesh, label=r"$\beta$")
    save(fig, out_dir, run_dir, "phase_diagram")


def plot_entanglement(path, out_dir, run_dir, tag):
    d = load_csv(path)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(d["t"], d["S"], lw=1.0, label="S")
    ax.plot(d["t"], d["S_rmt"], "--", lw=1.0, label=r"$S_{\rm RMT}$")
    ax.set(xlabel="t (kicks)", ylabel="S (nats)", title=tag)
    ax.legend()
    save(fig, out_dir, run_dir, "entanglement")


HANDLERS = {
    "energy.csv": plot_energy,
    "section.csv": plot_section,
    "lyapunov.csv": plot_lyapunov,
    "phase_diagram.csv": plot_phase_diagram,
    "entanglement.csv": plot_entanglement,
}
HISTOGRAMS = ("histogram_p1.csv", "histogram_p2.csv", "marginal_p1.csv", "marginal_p2.csv")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("run_dirs", nargs="+")
    parser.add_argument("--out", default="figures")
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for run_dir in args.run_dirs:
        tag = tag_for(run_dir)
        for name, handler in HANDLERS.items():
            path = os.path.join(run_dir, name)
            if os.path.exists(path):
                handler(path, args.out, run_dir, tag)
        for name in HISTOGRAMS:
            path = os.path.join(run_dir, name)
            if os.path.exists(path):
                plot_histogram(path, args.out, run_dir, tag, name.replace(".csv", ""))


if __name__ == "__main__":
    main()

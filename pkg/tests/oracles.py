"""Independent reference implementations used as test oracles.

Everything here is written from the definitions with plain loops and shares no
code with the package beyond data containers.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def esf_bruteforce(vals):
    vals = list(vals)
    out = [1.0]
    for q in range(1, len(vals) + 1):
        out.append(sum(math.prod(c) for c in itertools.combinations(vals, q)))
    return np.array(out)


# ----------------------------------------------------------------- metric

def partial_injections(nx, ny):
    """All maps {0..nx-1} -> {-1, 0..ny-1} injective on the non-negative values."""
    out = []
    for a in itertools.product(range(-1, ny), repeat=nx):
        used = [j for j in a if j >= 0]
        if len(used) == len(set(used)):
            out.append(a)
    return out


def positions(trajs, k):
    out = []
    for tr in trajs:
        d = {}
        for i in range(tr.length):
            t = tr.birth_time + i
            if t <= k:
                d[t] = np.asarray(tr.states[i], dtype=float)[:2]
        out.append(d)
    return out


def metric_bruteforce(X, Y, k, p=2.0, c=10.0, gamma=1.0):
    """Minimum over every assignment sequence, evaluated as a dense tensor sum."""
    xs, ys = positions(X, k), positions(Y, k)
    A = partial_injections(len(xs), len(ys))
    S = len(A)
    cost = np.zeros((k, S))
    for t in range(1, k + 1):
        for s, a in enumerate(A):
            tot = 0.0
            for i, j in enumerate(a):
                xe = t in xs[i]
                if j < 0:
                    tot += c**p / 2 if xe else 0.0
                    continue
                ye = t in ys[j]
                if xe and ye:
                    tot += min(np.linalg.norm(xs[i][t] - ys[j][t]), c) ** p
                elif xe or ye:
                    tot += c**p / 2
            for j in range(len(ys)):
                if j not in a and t in ys[j]:
                    tot += c**p / 2
            cost[t - 1, s] = tot
    sw = np.zeros((S, S))
    for s1, a in enumerate(A):
        for s2, b in enumerate(A):
            v = 0.0
            for ai, bi in zip(a, b):
                if ai != bi:
                    v += 1.0 if (ai >= 0 and bi >= 0) else 0.5
            sw[s1, s2] = gamma**p * v
    total = cost[0]
    for t in range(1, k):
        # one tensor axis per scan: every assignment sequence is enumerated
        total = total[..., None] + sw + cost[t]
    return float(total.min() ** (1.0 / p))


# ----------------------------------------------------- robust BG-PHD, L = 1

def gauss_logpdf(z, m, S):
    d = z - m
    return -0.5 * (d @ np.linalg.solve(S, d) + np.log(np.linalg.det(2 * np.pi * S)))


def beta_pred(u, v, k):
    s = u + v
    mu = u / s
    var = u * v / (s * s * (s + 1)) * k
    f = mu * (1 - mu) / var - 1
    return max(f * mu, 1 + 1e-6), max(f * (1 - mu), 1 + 1e-6)


class RobustBGPHD:
    """Beta-Gaussian PHD filter on single states (list-of-dicts, loops only)."""

    def __init__(self, F, Q, H, R, p_S, births, k_beta, rate, area, gate=None,
                 T_p=1e-5, T_a=4.0, J_max=100):
        self.F, self.Q, self.H, self.R = F, Q, H, R
        self.p_S, self.births, self.k_beta = p_S, births, k_beta
        self.rate, self.area, self.gate = rate, area, gate
        self.T_p, self.T_a, self.J_max = T_p, T_a, J_max
        self.comps = []

    def predict(self):
        out = [dict(c) for c in self.births]
        for c in self.comps:
            u, v = beta_pred(c["u"], c["v"], self.k_beta)
            out.append(dict(w=self.p_S * c["w"], m=self.F @ c["m"],
                            P=self.F @ c["P"] @ self.F.T + self.Q, u=u, v=v))
        self.comps = out

    def update(self, Z):
        H, R = self.H, self.R
        out = []
        for c in self.comps:
            a = c["u"] / (c["u"] + c["v"])
            out.append(dict(w=c["w"] * (1 - a), m=c["m"], P=c["P"], u=c["u"], v=c["v"] + 1))
        for z in Z:
            det = []
            for c in self.comps:
                a = c["u"] / (c["u"] + c["v"])
                S = H @ c["P"] @ H.T + R
                d = z - H @ c["m"]
                maha = d @ np.linalg.solve(S, d)
                q = 0.0 if (self.gate is not None and maha > self.gate) else \
                    math.exp(gauss_logpdf(z, H @ c["m"], S))
                K = c["P"] @ H.T @ np.linalg.inv(S)
                det.append(dict(w=a * c["w"] * q, m=c["m"] + K @ d,
                                P=c["P"] - K @ H @ c["P"], u=c["u"] + 1, v=c["v"]))
            den = self.rate / self.area + sum(x["w"] for x in det)
            for x in det:
                x["w"] /= den
            out.extend(det)
        self.comps = out

    def reduce(self):
        comps = [c for c in self.comps if c["w"] > self.T_p]
        order = sorted(range(len(comps)), key=lambda i: -comps[i]["w"])
        alive = set(range(len(comps)))
        merged = []
        for j in order:
            if j not in alive:
                continue
            n = len(comps[j]["m"])
            Pj = comps[j]["P"][-n:, -n:]
            group = [i for i in sorted(alive)
                     if (comps[i]["m"] - comps[j]["m"]) @ np.linalg.solve(
                         Pj, comps[i]["m"] - comps[j]["m"]) <= self.T_a]
            if j not in group:
                group.append(j)
            W = sum(comps[i]["w"] for i in group)
            c = dict(comps[j])
            c["w"] = W
            if len(group) > 1:
                mu = sum(comps[i]["w"] * comps[i]["u"] / (comps[i]["u"] + comps[i]["v"])
                         for i in group) / W
                var = sum(comps[i]["w"] * comps[i]["u"] * comps[i]["v"]
                          / ((comps[i]["u"] + comps[i]["v"]) ** 2
                             * (comps[i]["u"] + comps[i]["v"] + 1)) for i in group) / W
                f = mu * (1 - mu) / var - 1
                c["u"], c["v"] = max(f * mu, 1 + 1e-6), max(f * (1 - mu), 1 + 1e-6)
            merged.append(c)
            alive -= set(group)
        merged.sort(key=lambda c: -c["w"])
        self.comps = merged[: self.J_max]


# ------------------------------------------- exact single-scan CPHD posterior

def iid_cluster_posterior(rho, w, a, logq, log_cbar, rho_c):
    """Exact posterior cardinality of an IID-cluster prior after one scan.

    ``w`` (J,), ``a`` (J,) per-component weight and detection probability,
    ``logq`` (J, M) single-target log-likelihoods, ``log_cbar`` (M,) clutter
    spatial log-density, ``rho_c`` clutter cardinality pmf. Sums over every
    subset of target-originated measurements.
    """
    J, M = logq.shape
    s = w / w.sum()
    miss = float(np.dot(1 - a, s))
    gz = [float(np.dot(a * s, np.exp(logq[:, i]))) for i in range(M)]
    cz = np.exp(log_cbar)
    N = len(rho) - 1
    like = np.zeros(N + 1)
    for n in range(N + 1):
        tot = 0.0
        for m in range(0, min(n, M) + 1):
            perm = math.factorial(n) / math.factorial(n - m)
            for W in itertools.combinations(range(M), m):
                rest = [i for i in range(M) if i not in W]
                tot += (perm * miss ** (n - m) * math.prod(gz[i] for i in W)
                        * math.factorial(M - m) * rho_c[M - m] * math.prod(cz[i] for i in rest))
        like[n] = tot
    post = rho * like
    return post / post.sum()

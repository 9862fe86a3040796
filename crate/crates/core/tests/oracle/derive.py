"""Direct evaluation of the reference values frozen into tests/acceptance.rs.

Pure Python, no dependency on the crate. Run: python3 derive.py
"""
import math

C = 299_792_458.0


def path_loss(d, eta, fc=2.4e9):
    lam = C / fc
    return 20 * math.log10(4 * math.pi / lam) + 10 * eta * math.log10(max(d, 1.0))


def value_iteration(n, succ, reward, terminal, gamma, sweeps=10_000):
    """Deterministic tabular MDP; succ/reward/terminal indexed [s][a]."""
    v = [0.0] * n
    for _ in range(sweeps):
        nv = [
            max(
                reward[s][a] + (0.0 if terminal[s][a] else gamma * v[succ[s][a]])
                for a in range(len(succ[s]))
            )
            for s in range(n)
        ]
        if max(abs(x - y) for x, y in zip(nv, v)) < 1e-15:
            return nv
        v = nv
    return v


def main():
    out = {}
    lam = C / 2.4e9
    out["wavelength"] = lam
    out["pl_1m_los"] = path_loss(1, 2)
    out["pl_10m_los"] = path_loss(10, 2)
    out["pl_10m_nlos"] = path_loss(10, 3.5)
    out["p_r_max"] = -10 + 2 + 2 - path_loss(1, 2)
    out["rssi_minus_25db"] = 10 ** (-25 / 10)
    out["noise_dbm"] = -174 + 10 * math.log10(1e6) + 10
    out["snr_at_minus_74"] = 10 ** ((-74 - out["noise_dbm"]) / 10)
    beta = 1e6 / math.sqrt(12)
    out["ranging_var_snr_1e3"] = C**2 / (8 * math.pi**2 * 1e3 * beta**2)

    u = (1 / math.sqrt(2), 1 / math.sqrt(2))
    out["fim_entry"] = u[0] * u[1] / 2.0
    a, b, d = 4.0, 0.0, 1.0
    det = a * d - b * b
    out["peb_diag_4_1"] = math.sqrt(d / det + a / det)

    out["motivation_half_quarter"] = 0.4 * 0.5 + 0.4 * 0.25
    out["effective_reward"] = 1 - 0.6 * 0.5
    out["td_error"] = 0 + 0.98 * max([0, 2, 1, 0, 0]) - 1

    # q(s,a) after 50 updates with gamma=0, r=1.3, alpha=0.55
    q = 0.0
    for _ in range(50):
        q += 0.55 * (1.3 - q)
    out["q_fixed_point_50"] = q

    # two-state chain: s0 -> s1 (r=0), s1 -> s1 (r=1); gamma 0.9
    v0 = v1 = 0.0
    for _ in range(5000):
        v1 += 0.5 * (1 + 0.9 * v1 - v1)
        v0 += 0.5 * (0 + 0.9 * v1 - v0)
    out["v_chain_s1"] = v1
    out["v_chain_s0"] = v0

    out["softmax_top"] = 1 / (1 + 4 * math.exp(-1 / 0.03))
    out["kappa_ep500"] = max(0.03, 1.2 * 0.996**500)
    out["alpha_ep500"] = max(0.09, 0.55 * 0.9985**500)
    out["spe_29"] = 29 / 58
    out["dirichlet_mean_101"] = 101 / 103
    chi = lambda l0, L: l0 * (L + 1) / (L - l0)
    out["chi_111"] = chi(1, 3)
    out["chi_101_1_1"] = chi(101, 103)
    out["p_mb_5252_2"] = 5252 / (5252 + 2 + 1e-6)

    # 3-state chain 0 -> 1 -> 2 -> goal(terminal, r=1), action 0 only
    vi = value_iteration(
        3, [[1], [2], [2]], [[0.0], [0.0], [1.0]], [[False], [False], [True]], 0.9
    )
    out["chain_q0"], out["chain_q1"], out["chain_q2"] = vi

    for k, v in out.items():
        print(f"{k} = {v!r}")


if __name__ == "__main__":
    main()

//! Independent evaluations of the pair probabilities: explicit 2x2 evolution
//! operators for kaon amplitudes and explicit decay-product vectors for the
//! no-detection outcomes.

use kaonlab::{
    default_constants, joint_like_probability, joint_outcome_table, joint_unlike_probability,
    named_state, NamedState, PhysicalConstants, QuasiSpinState,
};
use num_complex::Complex64 as C;

type M2 = [[C; 2]; 2];

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn mat_vec(m: &M2, v: [C; 2]) -> [C; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

fn inv(m: &M2) -> M2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

fn mat_mul(a: &M2, b: &M2) -> M2 {
    let mut r = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

fn eigenvalues(k: &PhysicalConstants) -> [C; 2] {
    [
        c(0.0, -0.5 * k.gamma_s()),
        c(k.delta_m(), -0.5 * k.gamma_l()),
    ]
}

/// `V` with columns `K_S`, `K_L` in the `{K0, K0bar}` basis.
fn mass_basis(k: &PhysicalConstants) -> M2 {
    let s = named_state(NamedState::KS, k).components();
    let l = named_state(NamedState::KL, k).components();
    [[s[0], l[0]], [s[1], l[1]]]
}

/// `exp(-i H t)` restricted to the kaon space, `H = V diag(lambda) V^-1`.
fn evolution(t: f64, k: &PhysicalConstants) -> M2 {
    let v = mass_basis(k);
    let lam = eigenvalues(k);
    let d = [
        [(c(0.0, -1.0) * lam[0] * t).exp(), c(0.0, 0.0)],
        [c(0.0, 0.0), (c(0.0, -1.0) * lam[1] * t).exp()],
    ];
    mat_mul(&mat_mul(&v, &d), &inv(&v))
}

fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn singlet() -> [[C; 2]; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [[c(0.0, 0.0), c(h, 0.0)], [c(-h, 0.0), c(0.0, 0.0)]]
}

/// `<a, b| U(t_l) x U(t_r) |psi>` for the singlet.
fn pair_amplitude(a: [C; 2], t_l: f64, b: [C; 2], t_r: f64, k: &PhysicalConstants) -> C {
    let ul = evolution(t_l, k);
    let ur = evolution(t_r, k);
    let psi = singlet();
    let mut amp = c(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            let mut e_i = [c(0.0, 0.0); 2];
            e_i[i] = c(1.0, 0.0);
            let mut e_j = [c(0.0, 0.0); 2];
            e_j[j] = c(1.0, 0.0);
            amp += psi[i][j] * dot(&a, &mat_vec(&ul, e_i)) * dot(&b, &mat_vec(&ur, e_j));
        }
    }
    amp
}

#[test]
fn strangeness_probabilities_match_amplitude_products() {
    let k = default_constants().without_cp_violation();
    let k0 = [c(1.0, 0.0), c(0.0, 0.0)];
    let k0bar = [c(0.0, 0.0), c(1.0, 0.0)];
    for i in 0..20 {
        for j in 0..20 {
            let t_l = 0.25 * i as f64;
            let t_r = 0.25 * j as f64;
            let like = pair_amplitude(k0, t_l, k0, t_r, &k).norm_sqr();
            let unlike = pair_amplitude(k0, t_l, k0bar, t_r, &k).norm_sqr();
            let like_cf = joint_like_probability(t_l, t_r, &k).unwrap();
            let unlike_cf = joint_unlike_probability(t_l, t_r, &k).unwrap();
            assert!((like - like_cf).abs() < 1e-12, "like at ({t_l}, {t_r})");
            assert!(
                (unlike - unlike_cf).abs() < 1e-12,
                "unlike at ({t_l}, {t_r})"
            );
        }
    }
}

/// Decay-product vectors `Omega_S(t)`, `Omega_L(t)` in a 2-dimensional
/// space, built by Cholesky factorization of their Gram matrix.
fn omega_vectors(t: f64, k: &PhysicalConstants) -> [[C; 2]; 2] {
    let v = mass_basis(k);
    let states = [[v[0][0], v[1][0]], [v[0][1], v[1][1]]];
    let lam = eigenvalues(k);
    let mut g = [[c(0.0, 0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let kk = dot(&states[a], &states[b]);
            g[a][b] = kk - kk * (c(0.0, 1.0) * (lam[a].conj() - lam[b]) * t).exp();
        }
    }
    let l00 = g[0][0].re.max(0.0).sqrt();
    let l10 = if l00 > 0.0 {
        g[1][0] / l00
    } else {
        c(0.0, 0.0)
    };
    let l11 = (g[1][1].re - l10.norm_sqr()).max(0.0).sqrt();
    // w_a = conj(row a of L) so that <w_a|w_b> = (L L^+)_{ab}
    [[c(l00, 0.0), c(0.0, 0.0)], [l10.conj(), c(l11, 0.0)]]
}

/// Evolved `K_S`, `K_L` as 4-vectors: kaon part then decay part.
fn evolved_mass_states(t: f64, k: &PhysicalConstants) -> [[C; 4]; 2] {
    let v = mass_basis(k);
    let lam = eigenvalues(k);
    let w = omega_vectors(t, k);
    let mut out = [[c(0.0, 0.0); 4]; 2];
    for a in 0..2 {
        let e = (c(0.0, -1.0) * lam[a] * t).exp();
        out[a] = [e * v[0][a], e * v[1][a], w[a][0], w[a][1]];
    }
    out
}

/// All four outcome probabilities from the explicit 16-dimensional state.
fn explicit_table(
    left: &QuasiSpinState,
    t_l: f64,
    right: &QuasiSpinState,
    t_r: f64,
    k: &PhysicalConstants,
) -> [f64; 4] {
    // singlet in the mass basis: C = V^-1 S V^-T
    let vi = inv(&mass_basis(k));
    let s = singlet();
    let mut coef = [[c(0.0, 0.0); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    coef[a][b] += vi[a][i] * s[i][j] * vi[b][j];
                }
            }
        }
    }
    let ul = evolved_mass_states(t_l, k);
    let ur = evolved_mass_states(t_r, k);
    let mut psi = [c(0.0, 0.0); 16];
    for a in 0..2 {
        for b in 0..2 {
            for x in 0..4 {
                for y in 0..4 {
                    psi[4 * x + y] += coef[a][b] * ul[a][x] * ur[b][y];
                }
            }
        }
    }
    let proj = |s: &QuasiSpinState| -> [[C; 4]; 4] {
        let v = s.components();
        let mut p = [[c(0.0, 0.0); 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                p[i][j] = v[i] * v[j].conj();
            }
        }
        p
    };
    let complement = |p: [[C; 4]; 4]| {
        let mut q = p;
        for i in 0..4 {
            for j in 0..4 {
                q[i][j] = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) } - p[i][j];
            }
        }
        q
    };
    let (yl, yr) = (proj(left), proj(right));
    let (nl, nr) = (complement(yl), complement(yr));
    let prob = |pl: &[[C; 4]; 4], pr: &[[C; 4]; 4]| {
        let mut out = [c(0.0, 0.0); 16];
        for x in 0..4 {
            for y in 0..4 {
                for x2 in 0..4 {
                    for y2 in 0..4 {
                        out[4 * x + y] += pl[x][x2] * pr[y][y2] * psi[4 * x2 + y2];
                    }
                }
            }
        }
        out.iter().map(|z| z.norm_sqr()).sum::<f64>()
    };
    [
        prob(&yl, &yr),
        prob(&yl, &nr),
        prob(&nl, &yr),
        prob(&nl, &nr),
    ]
}

#[test]
fn joint_table_matches_explicit_decay_vectors() {
    let eps_list = [c(0.0, 0.0), c(1.58e-3, 1.58e-3), c(-4e-3, 7e-3)];
    let names = NamedState::ALL;
    let times = [0.0, 1e-3, 0.3, 1.0, 2.5, 7.0];
    for eps in eps_list {
        let k = default_constants().with_epsilon(eps).unwrap();
        for (i, &ln) in names.iter().enumerate() {
            let rn = names[(i * 5 + 1) % names.len()];
            let left = named_state(ln, &k);
            let right = named_state(rn, &k);
            for &t_l in &times {
                for &t_r in &times {
                    let table = joint_outcome_table(&left, t_l, &right, t_r, &k).unwrap();
                    let got = [table.p_yy, table.p_yn, table.p_ny, table.p_nn];
                    let want = explicit_table(&left, t_l, &right, t_r, &k);
                    for (g, w) in got.iter().zip(want) {
                        assert!(
                            (g - w).abs() < 1e-12,
                            "{ln} {t_l} / {rn} {t_r}, eps {eps}: {got:?} vs {want:?}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn yes_yes_matches_amplitude_product_with_cp_violation() {
    let k = default_constants();
    let k1 = named_state(NamedState::K1, &k);
    let ks = named_state(NamedState::KS, &k);
    for (t_l, t_r) in [(0.0, 0.0), (0.4, 1.7), (3.0, 0.2)] {
        let amp = pair_amplitude(ks.components(), t_l, k1.components(), t_r, &k);
        let t = joint_outcome_table(&ks, t_l, &k1, t_r, &k).unwrap();
        assert!((t.p_yy - amp.norm_sqr()).abs() < 1e-14);
    }
}

#[test]
fn mass_states_at_zero_cp_violation() {
    // p_yy(K_S t_l, K_L t_r) = exp(-gS t_l - gL t_r) / 2 for the singlet
    let k = default_constants().without_cp_violation();
    let ks = named_state(NamedState::KS, &k);
    let kl = named_state(NamedState::KL, &k);
    for (t_l, t_r) in [(0.0, 0.0), (0.7, 2.0), (4.0, 100.0)] {
        let t = joint_outcome_table(&ks, t_l, &kl, t_r, &k).unwrap();
        let expected = 0.5 * (-k.gamma_s() * t_l - k.gamma_l() * t_r).exp();
        assert!((t.p_yy - expected).abs() < 1e-14);
    }
}

//! Reference implementations for tests. The register and operators here do
//! not call into the library: states are plain amplitude vectors over
//! ascending atom labels, operators are assembled from `S±` by hand and
//! exponentiated by Taylor series. [`props`] holds the shared property checks.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C = Complex64;
pub type M = DMatrix<C>;

pub const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// `exp(a)` by scaling and squaring around a 40-term Taylor series.
pub fn taylor_expm(a: &M) -> M {
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale /= 2.0;
        squarings += 1;
    }
    let x = a * C::new(scale, 0.0);
    let n = a.nrows();
    let mut term = M::identity(n, n);
    let mut sum = M::identity(n, n);
    for k in 1..40 {
        term = &term * &x / C::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `|e⟩⟨g|` with `|g⟩ = 0`, `|e⟩ = 1`.
pub fn s_plus() -> M {
    let mut m = M::zeros(2, 2);
    m[(1, 0)] = c(1.0, 0.0);
    m
}

pub fn s_minus() -> M {
    s_plus().adjoint()
}

pub fn id(n: usize) -> M {
    M::identity(n, n)
}

/// `λ/2 [Σ_j 1_j + Σ_{j≠k} (S_j⁺S_k⁺ + S_j⁺S_k⁻ + h.c.)]` on two atoms.
pub fn heff_from_ladder_ops(lambda: f64) -> M {
    let on = |j: usize, op: &M| {
        if j == 0 {
            op.kronecker(&id(2))
        } else {
            id(2).kronecker(op)
        }
    };
    let mut sum = on(0, &id(2)) + on(1, &id(2));
    for (j, k) in [(0, 1), (1, 0)] {
        let pp = on(j, &s_plus()) * on(k, &s_plus());
        let pm = on(j, &s_plus()) * on(k, &s_minus());
        sum += &pp + pp.adjoint() + &pm + pm.adjoint();
    }
    sum * c(lambda / 2.0, 0.0)
}

/// `Ω Σ_j (S_j⁺ + S_j⁻)` on two atoms.
pub fn drive_from_ladder_ops(omega: f64) -> M {
    let x = s_plus() + s_minus();
    (x.kronecker(&id(2)) + id(2).kronecker(&x)) * c(omega, 0.0)
}

/// `e^{−iH₀t} e^{−iH_eff t}` at `t = 1` with `λ = λt`, `Ω = Ωt`.
pub fn pair_unitary(lambda_t: f64, omega_t: f64) -> M {
    let mi = c(0.0, -1.0);
    taylor_expm(&(drive_from_ladder_ops(omega_t) * mi))
        * taylor_expm(&(heff_from_ladder_ops(lambda_t) * mi))
}

/// Diagonal `σz` in the `|e⟩⟨e| − |g⟩⟨g|` convention.
pub fn sigma_z() -> M {
    let mut m = M::zeros(2, 2);
    m[(0, 0)] = c(-1.0, 0.0);
    m[(1, 1)] = c(1.0, 0.0);
    m
}

pub fn sigma_x() -> M {
    s_plus() + s_minus()
}

pub fn dist(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Qubit register over ascending atom labels, first label most significant.
#[derive(Debug, Clone)]
pub struct Reg {
    pub labels: Vec<u32>,
    pub amps: Vec<C>,
}

/// `⟨g|`, `⟨e|`, `⟨X+|`, `⟨X−|` as `[⟨φ|g⟩, ⟨φ|e⟩]`.
pub const BRA_G: [f64; 2] = [1.0, 0.0];
pub const BRA_E: [f64; 2] = [0.0, 1.0];
pub const BRA_PLUS: [f64; 2] = [H, H];
pub const BRA_MINUS: [f64; 2] = [-H, H];

impl Reg {
    /// `(α|e⟩+β|g⟩)₁ ⊗ GHZ(2,3,4) ⊗ GHZ(5,6,7) ⊗ … ⊗ Bell(3n−1, 3n)`.
    pub fn protocol_input(alpha: C, beta: C, n_users: u32) -> Reg {
        let n = 3 * n_users;
        let labels: Vec<u32> = (1..=n).collect();
        let mut groups: Vec<Vec<u32>> = (2..=n_users)
            .map(|k| vec![3 * k - 4, 3 * k - 3, 3 * k - 2])
            .collect();
        groups.push(vec![n - 1, n]);
        let mut amps = vec![c(0.0, 0.0); 1 << n];
        for (idx, amp) in amps.iter_mut().enumerate() {
            let bit = |label: u32| (idx >> (n - label)) & 1;
            let mut a = if bit(1) == 1 { alpha } else { beta };
            for g in &groups {
                let first = bit(g[0]);
                if g.iter().all(|&l| bit(l) == first) {
                    a *= H;
                } else {
                    a = c(0.0, 0.0);
                }
            }
            *amp = a;
        }
        Reg { labels, amps }
    }

    pub fn qubit(label: u32, alpha: C, beta: C) -> Reg {
        Reg {
            labels: vec![label],
            amps: vec![beta, alpha],
        }
    }

    fn shift(&self, label: u32) -> usize {
        let pos = self
            .labels
            .iter()
            .position(|&l| l == label)
            .expect("label in register");
        self.labels.len() - 1 - pos
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Apply a `2^k × 2^k` operator to `targets` (first target most significant).
    pub fn apply(&mut self, targets: &[u32], u: &M) {
        let shifts: Vec<usize> = targets.iter().map(|&t| self.shift(t)).collect();
        let k = targets.len();
        let mask: usize = shifts.iter().map(|s| 1 << s).sum();
        let mut out = vec![c(0.0, 0.0); self.amps.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let row = shifts
                .iter()
                .fold(0, |acc, s| (acc << 1) | ((idx >> s) & 1));
            let base = idx & !mask;
            for col in 0..(1 << k) {
                let mut src = base;
                for (j, s) in shifts.iter().enumerate() {
                    src |= ((col >> (k - 1 - j)) & 1) << s;
                }
                *slot += u[(row, col)] * self.amps[src];
            }
        }
        self.amps = out;
    }

    /// Project `label` onto the bra `[⟨φ|g⟩, ⟨φ|e⟩]`; returns the probability
    /// and the normalized remainder.
    pub fn measure(&self, label: u32, bra: [f64; 2]) -> (f64, Reg) {
        let s = self.shift(label);
        let rest: Vec<u32> = self
            .labels
            .iter()
            .copied()
            .filter(|&l| l != label)
            .collect();
        let mut amps = vec![c(0.0, 0.0); self.amps.len() / 2];
        for (idx, a) in self.amps.iter().enumerate() {
            let b = (idx >> s) & 1;
            let low = idx & ((1 << s) - 1);
            let high = (idx >> (s + 1)) << s;
            amps[high | low] += a * bra[b];
        }
        let p: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
        if p > 0.0 {
            let k = 1.0 / p.sqrt();
            amps.iter_mut().for_each(|z| *z *= k);
        }
        (p, Reg { labels: rest, amps })
    }

    /// Measure several atoms in sequence, multiplying the probabilities.
    pub fn measure_all(&self, outcomes: &[(u32, [f64; 2])]) -> (f64, Reg) {
        outcomes
            .iter()
            .fold((1.0, self.clone()), |(p, r), &(l, bra)| {
                let (q, next) = r.measure(l, bra);
                (p * q, next)
            })
    }

    pub fn fidelity(&self, other: &Reg) -> f64 {
        assert_eq!(self.labels, other.labels);
        let ip: C = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        ip.norm_sqr()
    }
}

/// Protocol input after every cavity pair has interacted.
pub fn oracle_distribute(alpha: C, beta: C, n_users: u32, lambda_t: f64, omega_t: f64) -> Reg {
    let mut r = Reg::protocol_input(alpha, beta, n_users);
    let u = pair_unitary(lambda_t, omega_t);
    r.apply(&[1, 2], &u);
    for k in 2..=n_users {
        r.apply(&[3 * k - 3, 3 * k - 1], &u);
    }
    r
}

/// Haar-random secret from four uniforms in `[0, 1)` via Box–Muller.
pub fn secret_from_uniforms(u: [f64; 4]) -> (C, C) {
    let g = |a: f64, b: f64| {
        let r = (-2.0 * (1.0 - a).ln()).sqrt();
        (
            r * (2.0 * std::f64::consts::PI * b).cos(),
            r * (2.0 * std::f64::consts::PI * b).sin(),
        )
    };
    let (a0, a1) = g(u[0], u[1]);
    let (b0, b1) = g(u[2], u[3]);
    let n = (a0 * a0 + a1 * a1 + b0 * b0 + b1 * b1).sqrt();
    (c(a0 / n, a1 / n), c(b0 / n, b1 / n))
}

pub mod props;

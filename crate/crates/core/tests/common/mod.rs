//! Reference routes shared by the integration tests. Nothing here calls into
//! the generator or integrator code paths it is used to check.

#![allow(dead_code)]

use dephasing::{Basis, Complex64, DensityMatrix, Network};
use nalgebra::DMatrix;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

fn projector(n: usize, s: usize) -> DMatrix<Complex64> {
    let mut p = DMatrix::zeros(n, n);
    p[(s, s)] = c(1.0);
    p
}

fn hamiltonian(net: &Network) -> DMatrix<Complex64> {
    net.hamiltonian().map(c)
}

/// `L(ρ) = i[H, ρ] + Σ_s γ_s (A_s ρ A_s − ½{A_s², ρ})` in the row-major
/// vectorization, where `vec(AXB) = (A ⊗ Bᵀ) vec(X)`.
fn lindblad(h: &DMatrix<Complex64>, jumps: &[(f64, DMatrix<Complex64>)]) -> DMatrix<Complex64> {
    let d = h.nrows();
    let id = DMatrix::<Complex64>::identity(d, d);
    let i = Complex64::new(0.0, 1.0);
    let mut l = (kron(h, &id) - kron(&id, &h.transpose())) * i;
    for (g, a) in jumps {
        let a2 = a * a;
        l += (kron(a, &a.transpose()) - (kron(&a2, &id) + kron(&id, &a2.transpose())) * c(0.5)) * c(*g);
    }
    l
}

/// Single-particle Haken–Strobl superoperator built from Kronecker products.
pub fn lindblad_single(net: &Network) -> DMatrix<Complex64> {
    let n = net.n_sites();
    let jumps: Vec<_> = (0..n).map(|s| (net.dephasing_rates()[s], projector(n, s))).collect();
    lindblad(&hamiltonian(net), &jumps)
}

/// Two-particle superoperator with collective site-number dephasing
/// `A_s = P_s ⊗ I + I ⊗ P_s` and `H₂ = H ⊗ I + I ⊗ H`.
pub fn lindblad_two(net: &Network) -> DMatrix<Complex64> {
    let n = net.n_sites();
    let id = DMatrix::<Complex64>::identity(n, n);
    let h = hamiltonian(net);
    let h2 = kron(&h, &id) + kron(&id, &h);
    let jumps: Vec<_> = (0..n)
        .map(|s| {
            let p = projector(n, s);
            (net.dephasing_rates()[s], kron(&p, &id) + kron(&id, &p))
        })
        .collect();
    lindblad(&h2, &jumps)
}

/// `exp(A)` by scaling and squaring of a degree-24 Taylor polynomial.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d = a.nrows();
    let norm = (0..d)
        .map(|col| (0..d).map(|row| a[(row, col)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * c(scale);
    let mut term = DMatrix::<Complex64>::identity(d, d);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &x * c(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `ρ(z) = exp(L z) ρ₀` on the row-major vectorization.
pub fn propagate(superop: &DMatrix<Complex64>, rho0: &DensityMatrix, z: f64) -> DensityMatrix {
    let v = nalgebra::DVector::from_vec(rho0.to_row_major());
    let out = expm(&(superop * c(z))) * v;
    DensityMatrix::from_row_major(rho0.basis(), out.as_slice()).unwrap()
}

pub fn max_abs_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    a.to_row_major()
        .iter()
        .zip(b.to_row_major())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Exchange operator `SWAP|p,q⟩ = |q,p⟩` on the ordered-pair basis.
pub fn swap(n: usize) -> DMatrix<Complex64> {
    let d = n * n;
    DMatrix::from_fn(d, d, |a, b| if a == (b % n) * n + b / n { c(1.0) } else { c(0.0) })
}

/// `(I ± SWAP)/2`.
pub fn exchange_projector(n: usize, sign: f64) -> DMatrix<Complex64> {
    let d = n * n;
    (DMatrix::<Complex64>::identity(d, d) + swap(n) * c(sign)) * c(0.5)
}

/// Hermitian positive semidefinite unit-trace matrix from arbitrary entries:
/// `ρ = A A† / Tr(A A†)`.
pub fn density_from(basis: Basis, entries: &[(f64, f64)]) -> DensityMatrix {
    let d = basis.size();
    let a = DMatrix::from_fn(d, d, |r, col| {
        let (re, im) = entries[(r * d + col) % entries.len()];
        Complex64::new(re, im)
    });
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::new(basis, m / tr).unwrap()
}

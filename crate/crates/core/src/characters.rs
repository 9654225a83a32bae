//! Dirichlet characters modulo a prime or a product of two distinct odd
//! primes, character-sum checks, and the character-sum form of box counts.
//!
//! A character is stored by its phases: `chi(n) = e(phase(n) / L)` where `L`
//! is the exponent of `(Z/q)*`. Group operations and comparisons against the
//! principal character are exact integer arithmetic on phases; only values
//! go through floating point.

use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{self, gcd, is_prime, pow_mod, residue};
use crate::curves::{self, FieldTables};
use crate::error::{Error, Result};

const NON_UNIT: u32 = u32::MAX;

/// Cyclic factor `(Z/p)*` with its primitive root and discrete logarithms.
#[derive(Debug, Clone)]
struct Component {
    prime: u64,
    root: u64,
    log: Vec<u32>,
}

impl Component {
    fn new(prime: u64) -> Result<Self> {
        let root = arith::primitive_root(prime)?;
        let mut log = vec![NON_UNIT; prime as usize];
        let mut power = 1u64;
        for e in 0..prime - 1 {
            log[power as usize] = e as u32;
            power = power * root % prime;
        }
        Ok(Component { prime, root, log })
    }

    fn order(&self) -> u64 {
        self.prime - 1
    }
}

/// The supported modulus shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusShape {
    Prime(u64),
    Biprime(u64, u64),
}

pub fn modulus_shape(q: u64) -> Result<ModulusShape> {
    if q < 3 {
        return Err(Error::UnsupportedModulus { modulus: q, reason: "need q >= 3" });
    }
    if q >= arith::MAX_MODULUS {
        return Err(Error::UnsupportedModulus { modulus: q, reason: "exceeds 2^31" });
    }
    if is_prime(q) {
        return Ok(ModulusShape::Prime(q));
    }
    let factors = arith::prime_factors(q);
    match factors[..] {
        [p1, p2] if p1 > 2 && p1 * p2 == q => Ok(ModulusShape::Biprime(p1, p2)),
        _ => Err(Error::UnsupportedModulus { modulus: q, reason: "need a prime or a product of two distinct odd primes" }),
    }
}

/// Every supported modulus in `3..=max`.
pub fn supported_moduli(max: u64) -> Vec<u64> {
    (3..=max).filter(|&q| modulus_shape(q).is_ok()).collect()
}

/// One Dirichlet character as a phase table over `[0, q)`.
#[derive(Debug, Clone)]
pub struct Character {
    exponents: Vec<u64>,
    phases: Vec<u32>,
    values: Vec<Complex64>,
}

impl Character {
    /// Per-component exponents `k_i` with `chi(g_i) = e(k_i / (p_i - 1))`.
    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&k| k == 0)
    }

    pub fn modulus(&self) -> u64 {
        self.values.len() as u64
    }

    pub fn value(&self, n: i64) -> Complex64 {
        self.values[residue(n, self.modulus()) as usize]
    }

    /// `Some(t)` with `chi(n) = e(t / L)`, or `None` when `gcd(n, q) > 1`.
    pub fn phase(&self, n: i64) -> Option<u32> {
        let t = self.phases[residue(n, self.modulus()) as usize];
        (t != NON_UNIT).then_some(t)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// All `phi(q)` characters mod `q`.
#[derive(Debug, Clone)]
pub struct CharacterTable {
    q: u64,
    phi: u64,
    exponent: u64,
    components: Vec<Component>,
    characters: Vec<Character>,
    roots: Vec<Complex64>,
}

impl CharacterTable {
    pub fn new(q: u64) -> Result<Self> {
        let primes = match modulus_shape(q)? {
            ModulusShape::Prime(p) => vec![p],
            ModulusShape::Biprime(p1, p2) => vec![p1, p2],
        };
        let components = primes.into_iter().map(Component::new).collect::<Result<Vec<_>>>()?;
        let phi: u64 = components.iter().map(Component::order).product();
        let exponent = components.iter().map(Component::order).fold(1, |l, o| l / gcd(l, o) * o);
        let roots: Vec<Complex64> =
            (0..exponent).map(|t| Complex64::from_polar(1.0, TAU * t as f64 / exponent as f64)).collect();

        let mut table = CharacterTable { q, phi, exponent, components, characters: Vec::new(), roots };
        let mut exponents = vec![0u64; table.components.len()];
        for _ in 0..phi {
            table.characters.push(table.character_from(&exponents));
            // Odometer over (k_1, ..., k_m), last component fastest.
            for (i, comp) in table.components.iter().enumerate().rev() {
                exponents[i] += 1;
                if exponents[i] < comp.order() {
                    break;
                }
                exponents[i] = 0;
            }
        }
        Ok(table)
    }

    fn character_from(&self, exponents: &[u64]) -> Character {
        let mut phases = vec![0u32; self.q as usize];
        for (n, phase) in phases.iter_mut().enumerate() {
            let mut t = 0u64;
            for (comp, &k) in self.components.iter().zip(exponents) {
                let l = comp.log[n % comp.prime as usize];
                if l == NON_UNIT {
                    t = NON_UNIT as u64;
                    break;
                }
                t += k * l as u64 % comp.order() * (self.exponent / comp.order());
            }
            *phase = if t == NON_UNIT as u64 { NON_UNIT } else { (t % self.exponent) as u32 };
        }
        let values = phases
            .iter()
            .map(|&t| if t == NON_UNIT { Complex64::new(0.0, 0.0) } else { self.roots[t as usize] })
            .collect();
        Character { exponents: exponents.to_vec(), phases, values }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    /// Exponent `L` of the unit group; all values are `L`-th roots of unity.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn characters(&self) -> &[Character] {
        &self.characters
    }

    pub fn character(&self, i: usize) -> &Character {
        &self.characters[i]
    }

    pub fn principal_index(&self) -> usize {
        0
    }

    pub fn principal(&self) -> &Character {
        &self.characters[0]
    }

    /// `(prime, primitive root)` for each cyclic component.
    pub fn generators(&self) -> Vec<(u64, u64)> {
        self.components.iter().map(|c| (c.prime, c.root)).collect()
    }

    /// Index of the character with the given component exponents.
    pub fn index_of(&self, exponents: &[u64]) -> usize {
        self.components
            .iter()
            .zip(exponents)
            .fold(0, |acc, (comp, &k)| acc * comp.order() as usize + (k % comp.order()) as usize)
    }

    /// Index of `chi_i * chi_j`.
    pub fn product(&self, i: usize, j: usize) -> usize {
        let ks: Vec<u64> = self.characters[i]
            .exponents
            .iter()
            .zip(&self.characters[j].exponents)
            .map(|(a, b)| a + b)
            .collect();
        self.index_of(&ks)
    }

    /// Index of `chi_i^k` (negative `k` conjugates).
    pub fn power(&self, i: usize, k: i64) -> usize {
        let ks: Vec<u64> = self.characters[i]
            .exponents
            .iter()
            .zip(&self.components)
            .map(|(&e, comp)| (e as i64 * k).rem_euclid(comp.order() as i64) as u64)
            .collect();
        self.index_of(&ks)
    }

    /// Discrete logarithm to the primitive root, for a prime modulus.
    pub fn log(&self, n: i64) -> Option<u64> {
        let comp = &self.components[0];
        if self.components.len() != 1 {
            return None;
        }
        let l = comp.log[residue(n, comp.prime) as usize];
        (l != NON_UNIT).then_some(l as u64)
    }

    /// The real character `(./p)` for a prime modulus.
    pub fn legendre_index(&self) -> Option<usize> {
        (self.components.len() == 1).then(|| self.index_of(&[self.phi / 2]))
    }

    /// The order-4 character with `chi(g) = i`, for a prime `p = 1 mod 4`.
    pub fn quartic_index(&self) -> Option<usize> {
        (self.components.len() == 1 && self.phi.is_multiple_of(4)).then(|| self.index_of(&[self.phi / 4]))
    }

    /// `max |sum_n chi(n) conj(chi'(n)) - phi [chi = chi']|` over all pairs.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, x) in self.characters.iter().enumerate() {
            for (j, y) in self.characters.iter().enumerate() {
                let s: Complex64 = x.values.iter().zip(&y.values).map(|(a, b)| a * b.conj()).sum();
                let expected = if i == j { self.phi as f64 } else { 0.0 };
                worst = worst.max((s - Complex64::new(expected, 0.0)).norm());
            }
        }
        worst
    }
}

/// `sum_{1 <= n <= N} chi(n)`.
pub fn char_sum(chi: &Character, n: u64) -> Complex64 {
    let q = chi.modulus();
    let values = chi.values();
    let period: Complex64 = values.iter().sum();
    let partial: Complex64 = (1..=n % q).map(|m| values[m as usize]).sum();
    period * (n / q) as f64 + partial
}

/// Both sides of `sum_chi |sum_n a_n chi(n)|^2 = phi(q) sum_{(a,q)=1} |sum_{n = a} a_n|^2`.
/// `coefficients[i]` is `a_{i+1}`.
pub fn lemma5_check(table: &CharacterTable, coefficients: &[Complex64]) -> (f64, f64) {
    let lhs = table
        .characters()
        .iter()
        .map(|chi| {
            coefficients
                .iter()
                .enumerate()
                .map(|(i, &a)| a * chi.value(i as i64 + 1))
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum::<f64>();
    let q = table.q();
    let mut classes = vec![Complex64::new(0.0, 0.0); q as usize];
    for (i, &a) in coefficients.iter().enumerate() {
        classes[((i as u64 + 1) % q) as usize] += a;
    }
    let rhs = table.phi() as f64
        * (1..q).filter(|&a| gcd(a, q) == 1).map(|a| classes[a as usize].norm_sqr()).sum::<f64>();
    (lhs, rhs)
}

/// `sum_{chi != chi_0} |sum_{n <= N} chi(n)|^4` and its ratio to `N^2 q log^6 q`.
pub fn fourth_moment_ratio(table: &CharacterTable, n: u64) -> (f64, f64) {
    let moment: f64 = table
        .characters()
        .iter()
        .filter(|chi| !chi.is_principal())
        .map(|chi| char_sum(chi, n).norm_sqr().powi(2))
        .sum();
    let q = table.q() as f64;
    let scale = (n as f64).powi(2) * q * q.ln().powi(6);
    (moment, if scale > 0.0 { moment / scale } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyaVinogradovScan {
    pub q: u64,
    pub max_abs_sum: f64,
    pub bound: f64,
    /// `(character index, N)` attaining the maximum.
    pub argmax: (usize, u64),
}

impl PolyaVinogradovScan {
    pub fn holds(&self) -> bool {
        self.max_abs_sum <= self.bound
    }
}

/// Largest `|sum_{n <= N} chi(n)|` over non-principal `chi` and `1 <= N <= q`,
/// against `sqrt(q) log q`. Ties resolve to the first in scan order.
pub fn polya_vinogradov_scan(table: &CharacterTable) -> PolyaVinogradovScan {
    let q = table.q();
    let mut best = (0.0f64, (0usize, 0u64));
    for (i, chi) in table.characters().iter().enumerate().filter(|(_, c)| !c.is_principal()) {
        let mut s = Complex64::new(0.0, 0.0);
        for n in 1..=q {
            s += chi.values()[(n % q) as usize];
            let v = s.norm();
            if v > best.0 {
                best = (v, (i, n));
            }
        }
    }
    let qf = q as f64;
    PolyaVinogradovScan { q, max_abs_sum: best.0, bound: qf.sqrt() * qf.ln(), argmax: best.1 }
}

/// The character-sum expression for a box count, split into the main term
/// and the two error terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCountDecomposition {
    pub p: u64,
    pub r: i64,
    #[serde(rename = "A")]
    pub a_box: u64,
    #[serde(rename = "B")]
    pub b_box: u64,
    /// Number of classes with trace `r` and `a, b != 0`.
    pub classes: u64,
    pub total: f64,
    #[serde(rename = "M")]
    pub main: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    /// Largest imaginary part among the summed parts; zero up to rounding.
    pub imaginary_residual: f64,
}

/// Evaluates, for `p = 1 mod 4`,
///
/// `1/(4 phi(p)) sum_k sum_chi sum_j (u_j/p)_4^{-k} conj(chi)^3(u_j) chi^2(v_j)
///   * sum_{|a|<=A} (a/p)_4^k chi^3(a) * sum_{|b|<=B} conj(chi)^2(b)`
///
/// over `k = 1..4`, all characters mod `p` and representatives `(u_j, v_j)`
/// of the classes with trace `r`. A `(k, chi)` pair contributes to `M` when
/// both `(./p)_4^k chi^3` and `chi^2` are principal, to `E2` when neither is,
/// and to `E1` otherwise.
pub fn box_count_via_characters(p: u64, r: i64, a_box: u64, b_box: u64) -> Result<BoxCountDecomposition> {
    curves::check_curve_prime(p)?;
    if p % 4 != 1 {
        return Err(Error::UnsupportedModulus { modulus: p, reason: "character expansion implemented for p = 1 mod 4" });
    }
    if a_box == 0 || b_box == 0 {
        return Err(Error::InvalidArgument("box half-widths A and B must be at least 1".into()));
    }
    let summary = curves::iso_classes_with_trace(p, r)?;
    let reps = summary.representatives();
    let table = CharacterTable::new(p)?;
    let l = table.exponent();
    debug_assert_eq!(l, p - 1);
    let quarter = l / 4;
    let log = |n: i64| table.log(n);

    // How many box entries have each discrete log.
    let histogram = |half: u64| {
        let mut counts = vec![0u64; l as usize];
        for n in -(half as i64)..=half as i64 {
            if let Some(i) = log(n) {
                counts[i as usize] += 1;
            }
        }
        counts
    };
    let box_a = histogram(a_box);
    let box_b = histogram(b_box);
    let roots: Vec<Complex64> = (0..l).map(|t| Complex64::from_polar(1.0, TAU * t as f64 / l as f64)).collect();
    let box_sum = |counts: &[u64], psi: u64| -> Complex64 {
        counts.iter().enumerate().map(|(i, &c)| roots[(psi * i as u64 % l) as usize] * c as f64).sum()
    };
    let rep_logs: Vec<(u64, u64)> = reps.iter().map(|&(u, v)| (log(u as i64).unwrap(), log(v as i64).unwrap())).collect();

    let mut parts = [Complex64::new(0.0, 0.0); 3];
    for k in 1..=4u64 {
        for kc in 0..l {
            // (./p)_4^k chi^3 and chi^2 as exponents of the generator character.
            let psi = (k * quarter + 3 * kc) % l;
            let square = 2 * kc % l;
            let reps_sum: Complex64 = rep_logs
                .iter()
                .map(|&(lu, lv)| {
                    let t = (l - psi * lu % l + square * lv % l) % l;
                    roots[t as usize]
                })
                .sum();
            let term = reps_sum * box_sum(&box_a, psi) * box_sum(&box_b, (l - square) % l);
            let slot = match (psi == 0, square == 0) {
                (true, true) => 0,
                (false, false) => 2,
                _ => 1,
            };
            parts[slot] += term;
        }
    }
    let scale = 1.0 / (4.0 * l as f64);
    let [main, e1, e2] = parts.map(|z| z * scale);
    let total = main + e1 + e2;
    let imaginary_residual = [main, e1, e2, total].iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(BoxCountDecomposition {
        p,
        r,
        a_box,
        b_box,
        classes: reps.len() as u64,
        total: total.re,
        main: main.re,
        e1: e1.re,
        e2: e2.re,
        imaginary_residual,
    })
}

/// `#{|a| <= A, |b| <= B : p does not divide ab, a_p(E(a, b)) = r}` by direct
/// trace evaluation of each residue pair met in the box.
pub fn direct_box_count(p: u64, r: i64, a_box: u64, b_box: u64) -> Result<u64> {
    curves::check_curve_prime(p)?;
    let tables = FieldTables::new(p);
    let mut traces: HashMap<(u64, u64), i64> = HashMap::new();
    let mut count = 0;
    for a in -(a_box as i64)..=a_box as i64 {
        let alpha = residue(a, p);
        if alpha == 0 {
            continue;
        }
        for b in -(b_box as i64)..=b_box as i64 {
            let beta = residue(b, p);
            if beta == 0 {
                continue;
            }
            let c = curves::CurveParams::from_residues(p, alpha, beta);
            if c.is_singular() {
                continue;
            }
            let t = *traces.entry((alpha, beta)).or_insert_with(|| tables.trace(alpha, beta));
            count += (t == r) as u64;
        }
    }
    Ok(count)
}

/// Direct power-of-generator construction of the characters mod a prime,
/// ordered by exponent.
pub fn characters_by_generator(p: u64) -> Result<Vec<Vec<Complex64>>> {
    let g = arith::primitive_root(p)?;
    Ok((0..p - 1)
        .map(|k| {
            let mut values = vec![Complex64::new(0.0, 0.0); p as usize];
            for e in 0..p - 1 {
                values[pow_mod(g, e, p) as usize] = Complex64::from_polar(1.0, TAU * (k * e) as f64 / (p - 1) as f64);
            }
            values
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{legendre, quartic_symbol};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn shapes() {
        assert_eq!(modulus_shape(7).unwrap(), ModulusShape::Prime(7));
        assert_eq!(modulus_shape(15).unwrap(), ModulusShape::Biprime(3, 5));
        for bad in [1u64, 2, 4, 9, 10, 45, 105] {
            assert!(modulus_shape(bad).is_err(), "q = {bad}");
        }
        assert_eq!(supported_moduli(15), vec![3, 5, 7, 11, 13, 15]);
    }

    #[test]
    fn table_mod_5_matches_generator_construction() {
        let table = CharacterTable::new(5).unwrap();
        assert_eq!(table.characters().len(), 4);
        assert_eq!(table.generators(), vec![(5, 2)]);
        let direct = characters_by_generator(5).unwrap();
        for (chi, want) in table.characters().iter().zip(&direct) {
            for n in 0..5 {
                assert!(close(chi.value(n), want[n as usize], 1e-12));
            }
        }
    }

    #[test]
    fn column_orthogonality_mod_7() {
        let table = CharacterTable::new(7).unwrap();
        for a in 0..7 {
            let s: Complex64 = table.characters().iter().map(|c| c.value(a)).sum();
            let expected = if a == 1 { 6.0 } else { 0.0 };
            assert!(close(s, Complex64::new(expected, 0.0), 1e-12), "a = {a}");
        }
    }

    #[test]
    fn biprime_table_is_crt_product() {
        let table = CharacterTable::new(15).unwrap();
        assert_eq!(table.characters().len(), 8);
        let t3 = CharacterTable::new(3).unwrap();
        let t5 = CharacterTable::new(5).unwrap();
        for chi in table.characters() {
            let (k3, k5) = (chi.exponents()[0], chi.exponents()[1]);
            for n in 0..15 {
                let want = t3.character(k3 as usize).value(n) * t5.character(k5 as usize).value(n);
                assert!(close(chi.value(n), want, 1e-12));
            }
        }
        assert_eq!(table.characters().iter().filter(|c| c.is_principal()).count(), 1);
    }

    #[test]
    fn group_structure() {
        for q in [7u64, 13, 15, 35] {
            let table = CharacterTable::new(q).unwrap();
            let n = table.characters().len();
            for i in (0..n).step_by(3) {
                for j in (0..n).step_by(2) {
                    let k = table.product(i, j);
                    for m in 0..q as i64 {
                        let want = table.character(i).value(m) * table.character(j).value(m);
                        assert!(close(table.character(k).value(m), want, 1e-9));
                    }
                }
                // total multiplicativity on units
                let chi = table.character(i);
                for a in 1..q as i64 {
                    for b in 1..q as i64 {
                        assert!(close(chi.value(a * b), chi.value(a) * chi.value(b), 1e-9));
                    }
                }
                assert_eq!(table.product(i, table.power(i, -1)), table.principal_index());
            }
        }
    }

    #[test]
    fn orthogonality_for_all_supported_moduli() {
        for q in supported_moduli(101) {
            let table = CharacterTable::new(q).unwrap();
            assert!(table.orthogonality_defect() < 1e-9, "q = {q}");
        }
    }

    #[test]
    fn special_characters_agree_with_symbols() {
        let table = CharacterTable::new(13).unwrap();
        let leg = table.character(table.legendre_index().unwrap());
        let quart = table.character(table.quartic_index().unwrap());
        for a in 0..13 {
            assert!(close(leg.value(a), Complex64::new(legendre(a, 13).unwrap() as f64, 0.0), 1e-12));
            assert!(close(quart.value(a), quartic_symbol(a, 13).unwrap().to_complex(), 1e-12));
        }
        assert!(close(quart.value(2), Complex64::new(0.0, 1.0), 1e-12));
    }

    #[test]
    fn char_sum_examples() {
        let table = CharacterTable::new(7).unwrap();
        assert!(close(char_sum(table.principal(), 7), Complex64::new(6.0, 0.0), 1e-12));
        for chi in table.characters().iter().filter(|c| !c.is_principal()) {
            assert!(close(char_sum(chi, 7), Complex64::new(0.0, 0.0), 1e-12));
            assert!(close(char_sum(chi, 21), Complex64::new(0.0, 0.0), 1e-12));
        }
        let leg = table.character(table.legendre_index().unwrap());
        assert!(close(char_sum(leg, 3), Complex64::new(1.0, 0.0), 1e-12));
        assert!(close(char_sum(leg, 0), Complex64::new(0.0, 0.0), 1e-12));
    }

    #[test]
    fn lemma5_examples_and_random_vectors() {
        let t5 = CharacterTable::new(5).unwrap();
        assert_eq!(lemma5_check(&t5, &[Complex64::new(0.0, 0.0); 10]), (0.0, 0.0));
        let (lhs, rhs) = lemma5_check(&t5, &[Complex64::new(1.0, 0.0); 20]);
        // only the principal character survives: |16|^2 = 4 * (4 classes * 4^2)
        assert!((lhs - 256.0).abs() < 1e-9 && (lhs - rhs).abs() <= 1e-9 * rhs);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for q in [7u64, 13, 15] {
            let table = CharacterTable::new(q).unwrap();
            for _ in 0..20 {
                let n = rng.random_range(1..60);
                let coeffs: Vec<Complex64> =
                    (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
                let (lhs, rhs) = lemma5_check(&table, &coeffs);
                assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-300));
            }
        }
    }

    #[test]
    fn fourth_moment_examples() {
        let t3 = CharacterTable::new(3).unwrap();
        let (moment, _) = fourth_moment_ratio(&t3, 1);
        assert!((moment - 1.0).abs() < 1e-12);
        let t13 = CharacterTable::new(13).unwrap();
        assert!(fourth_moment_ratio(&t13, 13).0 < 1e-18);
        let mut worst: f64 = 0.0;
        for q in supported_moduli(101).into_iter().filter(|&q| is_prime(q)) {
            let table = CharacterTable::new(q).unwrap();
            for n in 1..=q {
                worst = worst.max(fourth_moment_ratio(&table, n).1);
            }
        }
        assert!(worst <= 100.0, "max ratio {worst}");
    }

    #[test]
    fn polya_vinogradov_small() {
        let t5 = CharacterTable::new(5).unwrap();
        let scan = polya_vinogradov_scan(&t5);
        let mut brute: f64 = 0.0;
        for chi in t5.characters().iter().skip(1) {
            for n in 1..=5 {
                brute = brute.max(char_sum(chi, n).norm());
            }
        }
        assert!((scan.max_abs_sum - brute).abs() < 1e-12);
        let t13 = CharacterTable::new(13).unwrap();
        let scan = polya_vinogradov_scan(&t13);
        assert!(scan.holds());
        assert!((scan.bound - 13f64.sqrt() * 13f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn box_count_small_cases() {
        let d = box_count_via_characters(13, 2, 13, 13).unwrap();
        let direct = direct_box_count(13, 2, 13, 13).unwrap();
        assert!((d.total - direct as f64).abs() < 1e-6, "{} vs {}", d.total, direct);
        assert!((d.main + d.e1 + d.e2 - d.total).abs() < 1e-6);
        assert!(d.imaginary_residual < 1e-6);

        let dist = curves::trace_distribution(17, None).unwrap();
        for (r, _) in dist.iter().filter(|&(_, n)| n > 0) {
            let d = box_count_via_characters(17, r, 30, 25).unwrap();
            let direct = direct_box_count(17, r, 30, 25).unwrap();
            assert!((d.total - direct as f64).abs() < 1e-6);
            assert!((d.total - d.total.round()).abs() < 1e-6);
        }
        assert!(matches!(box_count_via_characters(13, 2, 0, 5), Err(Error::InvalidArgument(_))));
        assert!(matches!(box_count_via_characters(19, 2, 5, 5), Err(Error::UnsupportedModulus { .. })));
    }

    #[test]
    fn main_term_has_two_contributions() {
        // (k, chi) = (4, chi_0) and (2, legendre) each contribute I * #a * #b / (4 phi).
        let (p, r, a, b) = (29u64, 3i64, 40u64, 40u64);
        let d = box_count_via_characters(p, r, a, b).unwrap();
        let units = |h: u64| (-(h as i64)..=h as i64).filter(|n| n.rem_euclid(p as i64) != 0).count() as f64;
        let expected = 2.0 * d.classes as f64 * units(a) * units(b) / (4.0 * (p - 1) as f64);
        assert!((d.main - expected).abs() < 1e-6);
    }
}

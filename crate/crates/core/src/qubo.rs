//! Binary quadratic models.
//!
//! A [`BinaryQuadraticModel`] stores `offset + Σ linear_i x_i + Σ_{i<j} quad_ij x_i x_j`
//! over binary variables. Quadratic keys are kept canonical (`i < j`) and
//! repeated insertions merge. Non-finite coefficients are rejected on insertion.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::scalar::Scalar;

/// An assignment of 0/1 values, index 0 first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Bitstring(Vec<u8>);

impl From<Bitstring> for String {
    fn from(b: Bitstring) -> Self {
        b.to_string()
    }
}

impl TryFrom<String> for Bitstring {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl Bitstring {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(param(format!("bit value {b} is not 0 or 1")));
        }
        Ok(Self(bits))
    }

    /// Bit `i` of the string is bit `i` (least significant first) of `index`.
    pub fn from_index(index: u64, len: usize) -> Self {
        Self((0..len).map(|i| ((index >> i) & 1) as u8).collect())
    }

    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = u8::from(value);
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            f.write_str(if *b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(param(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryQuadraticModel<T> {
    linear: Vec<T>,
    quadratic: BTreeMap<(usize, usize), T>,
    offset: T,
}

fn check_finite<T: Scalar>(v: T, what: &str) -> Result<()> {
    if v.is_finite_value() {
        Ok(())
    } else {
        Err(param(format!("non-finite {what} coefficient {v}")))
    }
}

impl<T: Scalar> BinaryQuadraticModel<T> {
    pub fn new(num_vars: usize) -> Self {
        Self {
            linear: vec![T::zero(); num_vars],
            quadratic: BTreeMap::new(),
            offset: T::zero(),
        }
    }

    pub fn from_terms(
        num_vars: usize,
        linear: impl IntoIterator<Item = (usize, T)>,
        quadratic: impl IntoIterator<Item = ((usize, usize), T)>,
        offset: T,
    ) -> Result<Self> {
        let mut model = Self::new(num_vars);
        for (i, v) in linear {
            model.add_linear(i, v)?;
        }
        for ((i, j), v) in quadratic {
            model.add_quadratic(i, j, v)?;
        }
        model.add_offset(offset)?;
        Ok(model)
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn linear(&self, i: usize) -> T {
        self.linear[i]
    }

    pub fn linear_terms(&self) -> &[T] {
        &self.linear
    }

    pub fn quadratic(&self, i: usize, j: usize) -> T {
        let key = if i < j { (i, j) } else { (j, i) };
        self.quadratic.get(&key).copied().unwrap_or_else(T::zero)
    }

    /// Canonical `(i, j, value)` triples with `i < j`, in ascending key order.
    pub fn quadratic_terms(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.quadratic.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn num_interactions(&self) -> usize {
        self.quadratic.len()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.num_vars() {
            Ok(())
        } else {
            Err(param(format!(
                "variable index {i} out of range for {} variables",
                self.num_vars()
            )))
        }
    }

    pub fn add_offset(&mut self, v: T) -> Result<()> {
        check_finite(v, "offset")?;
        self.offset += v;
        Ok(())
    }

    pub fn add_linear(&mut self, i: usize, v: T) -> Result<()> {
        self.check_index(i)?;
        check_finite(v, "linear")?;
        self.linear[i] += v;
        Ok(())
    }

    /// Adds `v·x_i·x_j`. A diagonal pair folds into the linear term since `x² = x`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, v: T) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        check_finite(v, "quadratic")?;
        if i == j {
            self.linear[i] += v;
            return Ok(());
        }
        let key = if i < j { (i, j) } else { (j, i) };
        let entry = self.quadratic.entry(key).or_insert_with(T::zero);
        *entry += v;
        if entry.is_zero() {
            self.quadratic.remove(&key);
        }
        Ok(())
    }

    pub fn energy(&self, x: &Bitstring) -> Result<T> {
        if x.len() != self.num_vars() {
            return Err(Error::Dimension {
                expected: self.num_vars(),
                actual: x.len(),
            });
        }
        Ok(self.energy_of(x.as_slice()))
    }

    /// Energy without the length check; `bits` must have `num_vars` entries.
    pub fn energy_of(&self, bits: &[u8]) -> T {
        let mut e = self.offset;
        for (v, &b) in self.linear.iter().zip(bits) {
            if b == 1 {
                e += *v;
            }
        }
        for (&(i, j), &v) in &self.quadratic {
            if bits[i] == 1 && bits[j] == 1 {
                e += v;
            }
        }
        e
    }

    /// Σ|linear| + Σ|quadratic|, the offset excluded.
    pub fn abs_coefficient_sum(&self) -> T {
        let lin = self.linear.iter().fold(T::zero(), |acc, v| acc + v.abs());
        self.quadratic
            .values()
            .fold(lin, |acc, v| acc + v.abs())
    }

    /// Twice the absolute coefficient sum, so one unit of squared violation
    /// outweighs the whole objective range. Falls back to 1 for an empty objective.
    pub fn default_penalty_strength(&self) -> T {
        let s = self.abs_coefficient_sum();
        if s.is_zero() {
            T::one()
        } else {
            T::two() * s
        }
    }

    /// Adds `strength·(Σ wᵢxᵢ − target)²`, expanded with `x² = x`.
    /// Repeated indices in `vars` are merged before expansion.
    pub fn add_equality_penalty(
        &mut self,
        vars: &[(usize, T)],
        target: T,
        strength: T,
    ) -> Result<()> {
        if !strength.is_finite_value() || strength <= T::zero() {
            return Err(param(format!(
                "penalty strength must be positive, got {strength}"
            )));
        }
        check_finite(target, "target")?;
        let mut merged: BTreeMap<usize, T> = BTreeMap::new();
        for &(i, w) in vars {
            self.check_index(i)?;
            check_finite(w, "penalty weight")?;
            *merged.entry(i).or_insert_with(T::zero) += w;
        }
        let terms: Vec<(usize, T)> = merged.into_iter().filter(|(_, w)| !w.is_zero()).collect();

        let two = T::two();
        for (a, &(i, wi)) in terms.iter().enumerate() {
            self.add_linear(i, strength * (wi * wi - two * target * wi))?;
            for &(j, wj) in &terms[a + 1..] {
                self.add_quadratic(i, j, strength * two * wi * wj)?;
            }
        }
        self.add_offset(strength * target * target)
    }

    /// Neighbour lists `(j, J_ij)` for every variable.
    pub fn adjacency(&self) -> Vec<Vec<(usize, T)>> {
        let mut adj = vec![Vec::new(); self.num_vars()];
        for (&(i, j), &v) in &self.quadratic {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }

    /// Substitutes `x = (1 + s)/2`, so bit 1 maps to spin +1.
    pub fn to_ising(&self) -> IsingModel<T> {
        let two = T::two();
        let four = two * two;
        let n = self.num_vars();
        let mut fields: Vec<T> = self.linear.iter().map(|&a| a / two).collect();
        let mut offset = self.offset + self.linear.iter().fold(T::zero(), |acc, &a| acc + a / two);
        let mut couplings = BTreeMap::new();
        for (&(i, j), &b) in &self.quadratic {
            let q = b / four;
            fields[i] += q;
            fields[j] += q;
            offset += q;
            couplings.insert((i, j), q);
        }
        IsingModel {
            num_spins: n,
            fields,
            couplings,
            offset,
        }
    }

    /// Line-oriented text: `offset v`, one `lin i v` line per variable, then
    /// `quad i j v` lines. Zero linear terms are written so the variable count
    /// survives a round trip.
    pub fn to_text(&self) -> String {
        let mut out = format!("offset {}\n", self.offset.to_exact_string());
        for (i, v) in self.linear.iter().enumerate() {
            out.push_str(&format!("lin {i} {}\n", v.to_exact_string()));
        }
        for (&(i, j), v) in &self.quadratic {
            out.push_str(&format!("quad {i} {j} {}\n", v.to_exact_string()));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut offset = None;
        let mut linear = Vec::new();
        let mut quadratic = Vec::new();
        let mut num_vars = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line, message };
            let fields: Vec<&str> = content.split_whitespace().collect();
            let index = |s: &str| -> Result<usize> {
                s.parse()
                    .map_err(|_| err(format!("invalid variable index {s:?}")))
            };
            let value = |s: &str| -> Result<T> {
                let v = T::parse_exact(s).ok_or_else(|| err(format!("invalid number {s:?}")))?;
                if v.is_finite_value() {
                    Ok(v)
                } else {
                    Err(err(format!("non-finite coefficient {s:?}")))
                }
            };
            match fields.as_slice() {
                ["offset", v] => {
                    if offset.is_some() {
                        return Err(err("duplicate offset line".into()));
                    }
                    offset = Some(value(v)?);
                }
                ["lin", i, v] => {
                    let i = index(i)?;
                    num_vars = num_vars.max(i + 1);
                    linear.push((i, value(v)?));
                }
                ["quad", i, j, v] => {
                    let (i, j) = (index(i)?, index(j)?);
                    if i == j {
                        return Err(err(format!("quadratic term on a single variable {i}")));
                    }
                    num_vars = num_vars.max(i.max(j) + 1);
                    quadratic.push(((i, j), value(v)?));
                }
                _ => return Err(err(format!("unrecognised line {content:?}"))),
            }
        }
        let offset = offset.ok_or(Error::Parse {
            line: 1,
            message: "missing offset line".into(),
        })?;
        Self::from_terms(num_vars, linear, quadratic, offset)
    }
}

/// Spin form `offset + Σ hᵢsᵢ + Σ_{i<j} J_ij sᵢsⱼ` with `s ∈ {−1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel<T> {
    pub num_spins: usize,
    pub fields: Vec<T>,
    pub couplings: BTreeMap<(usize, usize), T>,
    pub offset: T,
}

impl<T: Scalar> IsingModel<T> {
    pub fn energy(&self, spins: &[i8]) -> Result<T> {
        if spins.len() != self.num_spins {
            return Err(Error::Dimension {
                expected: self.num_spins,
                actual: spins.len(),
            });
        }
        let spin = |s: i8| if s > 0 { T::one() } else { -T::one() };
        let mut e = self.offset;
        for (h, &s) in self.fields.iter().zip(spins) {
            e += *h * spin(s);
        }
        for (&(i, j), &c) in &self.couplings {
            e += c * spin(spins[i]) * spin(spins[j]);
        }
        Ok(e)
    }

    pub fn spins_of(bits: &Bitstring) -> Vec<i8> {
        bits.as_slice()
            .iter()
            .map(|&b| if b == 1 { 1 } else { -1 })
            .collect()
    }
}

/// Clamped binary encoding of an integer in `[0, max_value]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerEncoding {
    pub owner: String,
    pub max_value: u64,
    pub bit_indices: Vec<usize>,
    pub weights: Vec<u64>,
}

/// Encoding of `[0, max_value]` starting at variable 0.
pub fn encode_integer(max_value: i64) -> Result<IntegerEncoding> {
    IntegerEncoding::new("", max_value, 0)
}

impl IntegerEncoding {
    /// Weights `1, 2, 4, …` with the last one clamped so they sum to `max_value`;
    /// bits occupy consecutive indices from `first_index`.
    pub fn new(owner: impl Into<String>, max_value: i64, first_index: usize) -> Result<Self> {
        if max_value < 0 {
            return Err(param(format!(
                "integer upper bound must be non-negative, got {max_value}"
            )));
        }
        let mut weights = Vec::new();
        let mut remaining = max_value as u64;
        let mut w = 1u64;
        while remaining > 0 {
            let take = w.min(remaining);
            weights.push(take);
            remaining -= take;
            w = w.saturating_mul(2);
        }
        let bit_indices = (first_index..first_index + weights.len()).collect();
        Ok(Self {
            owner: owner.into(),
            max_value: max_value as u64,
            bit_indices,
            weights,
        })
    }

    pub fn num_bits(&self) -> usize {
        self.weights.len()
    }

    /// Bits (in weight order) representing `value`, chosen greedily: the
    /// clamped top weight first, then the powers of two from large to small.
    pub fn encode(&self, value: u64) -> Result<Vec<u8>> {
        if value > self.max_value {
            return Err(param(format!(
                "value {value} exceeds encodable maximum {}",
                self.max_value
            )));
        }
        let k = self.weights.len();
        let mut bits = vec![0u8; k];
        let mut remaining = value;
        for b in (0..k).rev() {
            if self.weights[b] <= remaining {
                bits[b] = 1;
                remaining -= self.weights[b];
            }
        }
        debug_assert_eq!(remaining, 0);
        Ok(bits)
    }

    /// Value of the encoding's own bits (in weight order).
    pub fn decode(&self, bits: &[u8]) -> u64 {
        self.weights
            .iter()
            .zip(bits)
            .map(|(&w, &b)| w * u64::from(b))
            .sum()
    }

    /// Value read from the encoding's positions in a full bitstring.
    pub fn decode_from(&self, x: &Bitstring) -> u64 {
        self.bit_indices
            .iter()
            .zip(&self.weights)
            .map(|(&i, &w)| w * u64::from(x.get(i)))
            .sum()
    }

    pub fn write_into(&self, value: u64, x: &mut Bitstring) -> Result<()> {
        for (&i, b) in self.bit_indices.iter().zip(self.encode(value)?) {
            x.set(i, b == 1);
        }
        Ok(())
    }

    /// `(variable index, weight)` pairs as scalars.
    pub fn terms<T: Scalar>(&self) -> Vec<(usize, T)> {
        self.bit_indices
            .iter()
            .zip(&self.weights)
            .map(|(&i, &w)| (i, T::from_u64(w).expect("weight fits scalar")))
            .collect()
    }
}

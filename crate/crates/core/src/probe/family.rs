use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ProbeField;
use crate::error::{param, Result};
use crate::field::{decode_position, write_field, BesovParams, CoeffField, CoeffSource};
use crate::wavelet::PeriodizedG;

/// The `d₁ = 2^{dJ₀}` probes built from `g`.
///
/// Subcube `i` of a cube `k` at scale `j` is `(k << J₀) + o_i` at scale
/// `j + J₀`, where `o_i` is the `i`-th offset in `{0..2^{J₀}−1}^d` in
/// lexicographic order (first coordinate most significant).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeFamily {
    pub g: ProbeField,
    pub j0: u32,
    pub j_max: u32,
}

impl ProbeFamily {
    /// Members live on scales `1..=j_max`; `g` is truncated at `j_max − J₀`.
    pub fn new(params: BesovParams, d: usize, j0: u32, j_max: u32) -> Result<Self> {
        if j0 == 0 || j_max <= j0 {
            return param(format!(
                "need J₀ ≥ 1 and j_max > J₀, got J₀ = {j0}, j_max = {j_max}"
            ));
        }
        if d as u32 * j0 > 20 {
            return param("2^{dJ₀} probes is more than the family supports");
        }
        Ok(Self {
            g: ProbeField::new(params, d, j_max - j0)?,
            j0,
            j_max,
        })
    }

    pub fn d(&self) -> usize {
        self.g.d
    }

    pub fn size(&self) -> usize {
        1usize << (self.d() as u32 * self.j0)
    }

    pub fn params(&self) -> BesovParams {
        self.g.params
    }

    /// Offset vector `o_i`.
    pub fn offset(&self, i: usize) -> Vec<u64> {
        let mask = (1u64 << self.j0) - 1;
        let d = self.d();
        (0..d)
            .map(|m| (i as u64 >> (self.j0 as usize * (d - 1 - m))) & mask)
            .collect()
    }

    /// The member whose subcubes contain `k`.
    pub fn member_of(&self, k: &[u64]) -> usize {
        let mask = (1u64 << self.j0) - 1;
        k.iter().fold(0u64, |acc, &c| (acc << self.j0) | (c & mask)) as usize
    }

    /// Subcubes of `(j, k)`, in member order.
    pub fn subcubes(&self, j: u32, k: &[u64]) -> Vec<(u32, Vec<u64>)> {
        (0..self.size())
            .map(|i| {
                let o = self.offset(i);
                let kk = k
                    .iter()
                    .zip(&o)
                    .map(|(&c, &oi)| (c << self.j0) | oi)
                    .collect();
                (j + self.j0, kk)
            })
            .collect()
    }

    /// `e^{(i)}` at `(j, k)` for `l ≠ 0^d`, `l' = 1^{d'}`.
    pub fn coefficient(&self, i: usize, j: u32, k: &[u64]) -> f64 {
        if j <= self.j0 || j > self.j_max || self.member_of(k) != i {
            return 0.0;
        }
        let parent: Vec<u64> = k.iter().map(|&c| c >> self.j0).collect();
        self.g.coefficient(j - self.j0, &parent)
    }

    pub fn member(&self, i: usize) -> ProbeMember {
        assert!(i < self.size(), "member {i} out of range");
        ProbeMember { family: *self, i }
    }

    /// `Σ_i β_i g^{(i)}`.
    pub fn combination(&self, beta: Vec<f64>) -> ProbeSum {
        assert_eq!(beta.len(), self.size(), "one weight per probe");
        ProbeSum {
            family: *self,
            beta,
        }
    }

    fn type_ok(&self, l: u32) -> bool {
        let d = self.d();
        let dp = self.params().dim - d;
        l & ((1 << d) - 1) != 0 && l >> d == (1 << dp) - 1
    }

    /// `Σ_λ |e^{(i)}_λ|^p` at scale `j`; the same for every member.
    fn member_energy(&self, j: u32, p: f64) -> f64 {
        if j <= self.j0 || j > self.j_max {
            return 0.0;
        }
        let dp = self.params().dim - self.d();
        ((self.j0 as usize * dp) as f64).exp2() * self.g.energy_at_scale(j - self.j0, p)
    }
}

/// Probe `g^{(i)}` as a coefficient field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeMember {
    pub family: ProbeFamily,
    pub i: usize,
}

impl CoeffSource for ProbeMember {
    fn dim(&self) -> usize {
        self.family.params().dim
    }

    fn j_max(&self) -> u32 {
        self.family.j_max
    }

    fn params(&self) -> Option<BesovParams> {
        Some(self.family.params())
    }

    fn coeff(&self, j: u32, k: &[u64], l: u32) -> f64 {
        if !self.family.type_ok(l) {
            return 0.0;
        }
        self.family.coefficient(self.i, j, &k[..self.family.d()])
    }

    fn for_each_nonzero(&self, j: u32, f: &mut dyn FnMut(&[u64], u32, f64)) {
        let fam = &self.family;
        if j <= fam.j0 || j > fam.j_max {
            return;
        }
        let (d, dim) = (fam.d(), self.dim());
        let high = ((1u32 << (dim - d)) - 1) << d;
        let offset = fam.offset(self.i);
        let jp = j - fam.j0;
        let mut k = vec![0u64; dim];
        for pos in 0..1u64 << (jp as usize * d) {
            let parent = decode_position(jp, pos, d);
            let e = fam.g.coefficient(jp, &parent);
            if e == 0.0 {
                continue;
            }
            for m in 0..d {
                k[m] = (parent[m] << fam.j0) | offset[m];
            }
            for pos2 in 0..1u64 << (j as usize * (dim - d)) {
                k[d..].copy_from_slice(&decode_position(j, pos2, dim - d));
                for l in 1..(1u32 << d) {
                    f(&k, l | high, e);
                }
            }
        }
    }

    fn energy_at_scale(&self, j: u32, p: f64) -> f64 {
        self.family.member_energy(j, p)
    }
}

/// `Σ_i β_i g^{(i)}`; at most one term is nonzero at any index.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSum {
    pub family: ProbeFamily,
    pub beta: Vec<f64>,
}

impl CoeffSource for ProbeSum {
    fn dim(&self) -> usize {
        self.family.params().dim
    }

    fn j_max(&self) -> u32 {
        self.family.j_max
    }

    fn params(&self) -> Option<BesovParams> {
        Some(self.family.params())
    }

    fn coeff(&self, j: u32, k: &[u64], l: u32) -> f64 {
        if !self.family.type_ok(l) {
            return 0.0;
        }
        let kd = &k[..self.family.d()];
        let i = self.family.member_of(kd);
        self.beta[i] * self.family.coefficient(i, j, kd)
    }

    fn energy_at_scale(&self, j: u32, p: f64) -> f64 {
        let e = self.family.member_energy(j, p);
        self.beta.iter().map(|b| b.abs().powf(p) * e).sum()
    }
}

/// `e^{(i)}_{(j,k,l)}(a) = e^{(i)}_{(j,(k,·),(l,1^{d'}))}·G_{d'}(2^j a)` for any `l ≠ 0^d`.
pub fn probe_trace_closed_form(
    family: &ProbeFamily,
    i: usize,
    j: u32,
    k: &[u64],
    a: &[f64],
    g: &PeriodizedG,
) -> f64 {
    let e = family.coefficient(i, j, k);
    if e == 0.0 {
        return 0.0;
    }
    e * g.eval_tensor_at_scale(j, a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeManifest {
    pub version: u32,
    pub j0: u32,
    pub d1: usize,
    pub d: usize,
    pub j_max: u32,
    pub enumeration: String,
    pub params: BesovParams,
    pub g_file: String,
    pub member_files: Vec<String>,
}

/// Writes `g.bcf`, `probe_<i>.bcf` for every member and `manifest.json`.
pub fn write_family(dir: &Path, family: &ProbeFamily) -> Result<ProbeManifest> {
    std::fs::create_dir_all(dir)?;
    let params = family.params();
    let save = |name: &str, src: &dyn CoeffSource| -> Result<()> {
        let field = CoeffField::materialize(src, params)?;
        let mut w = BufWriter::new(File::create(dir.join(name))?);
        write_field(&mut w, &field)
    };
    save("g.bcf", &family.g)?;
    let mut member_files = Vec::new();
    for i in 0..family.size() {
        let name = format!("probe_{i}.bcf");
        save(&name, &family.member(i))?;
        member_files.push(name);
    }
    let manifest = ProbeManifest {
        version: 1,
        j0: family.j0,
        d1: family.size(),
        d: family.d(),
        j_max: family.j_max,
        enumeration: "lexicographic offsets in {0..2^J0-1}^d, first coordinate most significant"
            .into(),
        params,
        g_file: "g.bcf".into(),
        member_files,
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(dir.join("manifest.json"), json + "\n")?;
    Ok(manifest)
}

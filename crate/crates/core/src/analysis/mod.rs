//! Numerical checks of the classification results: axiom reports, flat
//! densities, basis decompositions, rank certificates and the decomposition
//! of invariant tensors.

pub mod axioms;
pub mod decompose;
pub mod delta;
pub mod invariant;
pub mod sampling;
mod svd;

use std::fmt;
use std::sync::Arc;

use crate::error::{MtlError, Result};
use crate::linalg;
use crate::patch::SupportPatch;
use crate::polytope::Polytope;
use crate::tensor::SymTensor;
use crate::valuations::{q_power_multiply, BasisDescriptor, BasisKind};

pub use axioms::{axiom_report, axiom_report_with, AxiomCheck, AxiomOptions, AxiomReport, Witness};
pub use decompose::{
    build_design, decompose_on_basis, decompose_with_design, independence_rank, DecompositionResult, Design,
    RankReport, SampleSpec,
};
pub use delta::{extract_delta, fit_delta_representation, DeltaFit, DeltaSample, DeltaTerm};
pub use invariant::{decompose_invariant_tensor, InvariantDecomposition};

pub type EvalFn = dyn Fn(&Polytope, &SupportPatch) -> Result<SymTensor> + Send + Sync;
pub type TranslationFn = dyn Fn(&Polytope, &SupportPatch, &[f64]) -> Result<SymTensor> + Send + Sync;

/// A tensor-valued function of (polytope, patch) under test.
#[derive(Clone)]
pub struct ValuationOracle {
    pub n: usize,
    pub p: usize,
    pub declared_degree: usize,
    pub name: String,
    eval: Arc<EvalFn>,
    translation_law: Option<Arc<TranslationFn>>,
}

impl fmt::Debug for ValuationOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ValuationOracle")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("p", &self.p)
            .field("declared_degree", &self.declared_degree)
            .finish()
    }
}

impl ValuationOracle {
    pub fn new<F>(name: impl Into<String>, n: usize, p: usize, declared_degree: usize, eval: F) -> Self
    where
        F: Fn(&Polytope, &SupportPatch) -> Result<SymTensor> + Send + Sync + 'static,
    {
        Self {
            n,
            p,
            declared_degree,
            name: name.into(),
            eval: Arc::new(eval),
            translation_law: None,
        }
    }

    /// Attaches an explicit prediction of `Gamma(P + t, eta + t)`, checked in
    /// addition to the generic polynomial test.
    pub fn with_translation_law<F>(mut self, law: F) -> Self
    where
        F: Fn(&Polytope, &SupportPatch, &[f64]) -> Result<SymTensor> + Send + Sync + 'static,
    {
        self.translation_law = Some(Arc::new(law));
        self
    }

    pub fn has_translation_law(&self) -> bool {
        self.translation_law.is_some()
    }

    /// Evaluates and checks the shape of the result.
    pub fn eval(&self, p: &Polytope, eta: &SupportPatch) -> Result<SymTensor> {
        if p.ambient_dim() != self.n {
            return Err(MtlError::DimensionMismatch {
                expected: self.n,
                found: p.ambient_dim(),
            });
        }
        let t = (self.eval)(p, eta)?;
        if t.dim() != self.n || t.rank() != self.p {
            return Err(MtlError::InvalidArgument(format!(
                "oracle {} returned a rank-{} tensor on R^{}, expected rank {} on R^{}",
                self.name,
                t.rank(),
                t.dim(),
                self.p,
                self.n
            )));
        }
        Ok(t)
    }

    pub fn predicted_translate(&self, p: &Polytope, eta: &SupportPatch, t: &[f64]) -> Option<Result<SymTensor>> {
        self.translation_law.as_ref().map(|law| law(p, eta, t))
    }

    /// The basis valuation named by `d`, with its translation law attached.
    pub fn from_descriptor(n: usize, d: BasisDescriptor) -> Result<Self> {
        d.validate(n)?;
        Ok(
            Self::new(d.to_string(), n, d.rank(), d.translation_degree(), move |p, eta| d.evaluate(p, eta))
                .with_translation_law(move |p, eta, t| descriptor_translate(d, p, eta, t)),
        )
    }

    /// `sum_i c_i d_i` over descriptors of a common rank.
    pub fn linear_combination(n: usize, terms: &[(f64, BasisDescriptor)]) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(MtlError::EmptyInput("linear combination"));
        };
        let p = first.rank();
        for (_, d) in terms {
            d.validate(n)?;
            if d.rank() != p {
                return Err(MtlError::InvalidArgument(format!(
                    "{d} has rank {}, expected {p}",
                    d.rank()
                )));
            }
        }
        let degree = terms.iter().map(|(_, d)| d.translation_degree()).max().unwrap_or(0);
        let name = terms
            .iter()
            .map(|(c, d)| format!("{c}*{d}"))
            .collect::<Vec<_>>()
            .join(" + ");
        let a: Vec<(f64, BasisDescriptor)> = terms.to_vec();
        let b = a.clone();
        Ok(Self::new(name, n, p, degree, move |poly, eta| {
            let mut acc = SymTensor::zero(n, p);
            for (c, d) in &a {
                acc.add_scaled(&d.evaluate(poly, eta)?, *c)?;
            }
            Ok(acc)
        })
        .with_translation_law(move |poly, eta, t| {
            let mut acc = SymTensor::zero(n, p);
            for (c, d) in &b {
                acc.add_scaled(&descriptor_translate(*d, poly, eta, t)?, *c)?;
            }
            Ok(acc)
        }))
    }
}

/// Translation law of a basis valuation: `sum_i c_i val^{r-i,s}(P, eta) t^i`
/// with `c_i = 1/i!` for `phi` and `binom(r, i)` for the tilde families.
fn descriptor_translate(d: BasisDescriptor, p: &Polytope, eta: &SupportPatch, t: &[f64]) -> Result<SymTensor> {
    let n = p.ambient_dim();
    let mut acc = SymTensor::zero(n, d.rank());
    for i in 0..=d.r {
        let lower = BasisDescriptor { r: d.r - i, ..d };
        let c = match d.kind {
            BasisKind::Phi => 1.0 / linalg::factorial(i),
            BasisKind::Tilde3 | BasisKind::Tilde2 => linalg::binomial(d.r, i),
        };
        let term = lower.without_q().evaluate_core(p, eta)?.sym_product(&SymTensor::vector_power(t, i))?;
        acc.add_scaled(&q_power_multiply(d.m, &term), c)?;
    }
    Ok(acc)
}

/// Relative size of a discrepancy: `|a - b|_max / max(1, |b|_max)`.
pub(crate) fn relative_residual(a: &SymTensor, b: &SymTensor) -> f64 {
    a.max_abs_diff(b) / b.max_abs().max(1.0)
}

#[cfg(test)]
mod tests;

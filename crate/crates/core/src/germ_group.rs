//! The local Lie group `(Ω, *)` on 𝔥-valued germs and the group of GL(m)-valued
//! germs, with the charts `EXP`/`LOG` and the adjoint action `AD`.
//!
//! Every operation works anchor by anchor on the truncated series of the two
//! arguments after bonding them to a common level. Membership in the various
//! neighbourhoods is carried as a [`Certificate`].

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coeff::CoefficientSpace;
use crate::error::{Error, Result};
use crate::germ_space::{BHolElement, GermSpace};
use crate::lie::MatrixLieBackend;
use crate::random::{random_coeff_with_norm, random_series};
use crate::series::{dist, exponents, TruncatedSeries};

/// `ε` of the injectivity neighbourhood `Ω_2 = {γ : ‖γ‖ < ε}`.
pub const OMEGA2_EPS: f64 = 0.5;

/// Budget of `Ω_1`, small enough that `Ω_1 * Ω_1 ⊆ Ω_2`.
pub fn omega1_budget() -> f64 {
    0.25 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    /// BCH domain: norm below the BCH radius.
    Omega,
    Omega1,
    Omega2,
    /// Neumann invertibility of every representative.
    Invertible,
}

/// `margin = budget − certified value`, positive when the certificate holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub budget: f64,
    pub margin: f64,
}

/// An 𝔥-valued germ in one of the Ω neighbourhoods.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalGermElement {
    element: BHolElement,
    certificate: Certificate,
}

impl LocalGermElement {
    pub fn element(&self) -> &BHolElement {
        &self.element
    }
    pub fn certificate(&self) -> Certificate {
        self.certificate
    }
    pub fn level(&self) -> usize {
        self.element.level()
    }
}

/// A GL(m)-valued germ with an invertibility certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct GermGroupElement {
    element: BHolElement,
    certificate: Certificate,
}

impl GermGroupElement {
    pub fn element(&self) -> &BHolElement {
        &self.element
    }
    pub fn certificate(&self) -> Certificate {
        self.certificate
    }
    pub fn level(&self) -> usize {
        self.element.level()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GermDoc {
    level: usize,
    certificate: Certificate,
    reps: Vec<Value>,
}

/// Germs around a fixed anchor set with values in gl(m) / GL(m).
#[derive(Debug, Clone)]
pub struct GermGroup {
    space: GermSpace,
    lie: MatrixLieBackend,
}

impl GermGroup {
    pub fn new(space: GermSpace, lie: MatrixLieBackend) -> Result<Self> {
        if space.space() != CoefficientSpace::Matrix(lie.dim()) {
            return Err(Error::Structural(format!(
                "germ space has values in {:?}, backend is gl({})",
                space.space(),
                lie.dim()
            )));
        }
        Ok(GermGroup { space, lie })
    }

    pub fn space(&self) -> &GermSpace {
        &self.space
    }
    pub fn lie(&self) -> &MatrixLieBackend {
        &self.lie
    }

    fn budget(&self, kind: CertificateKind) -> f64 {
        match kind {
            CertificateKind::Omega => self.lie.bch_radius(),
            CertificateKind::Omega1 => omega1_budget(),
            CertificateKind::Omega2 => OMEGA2_EPS,
            CertificateKind::Invertible => 1.0,
        }
    }

    /// Certifies `e` for `kind`, bonding to deeper levels until the majorant is
    /// within the budget.
    pub fn certify(&self, e: &BHolElement, kind: CertificateKind) -> Result<LocalGermElement> {
        if kind == CertificateKind::Invertible {
            return Err(Error::Structural("invertibility certifies group elements".into()));
        }
        let budget = self.budget(kind);
        for n in e.level()..=self.space.levels() {
            let b = self.space.bond(e, n)?;
            if b.norm_upper() < budget {
                return Ok(LocalGermElement {
                    certificate: Certificate {
                        kind,
                        budget,
                        margin: budget - b.norm_upper(),
                    },
                    element: b,
                });
            }
        }
        Err(Error::Domain(format!(
            "germ not in {kind:?}: majorant {:.6} ≥ budget {budget:.6} at every available level",
            e.norm_upper()
        )))
    }

    /// Element of the BCH domain `Ω` without bonding.
    pub fn local(&self, e: BHolElement) -> Result<LocalGermElement> {
        let budget = self.budget(CertificateKind::Omega);
        if e.norm_upper() >= budget {
            return Err(Error::Domain(format!(
                "germ not in Ω: majorant {:.6} ≥ BCH radius {budget:.6}",
                e.norm_upper()
            )));
        }
        Ok(LocalGermElement {
            certificate: Certificate {
                kind: CertificateKind::Omega,
                budget,
                margin: budget - e.norm_upper(),
            },
            element: e,
        })
    }

    fn invertibility_margin(&self, e: &BHolElement) -> Result<f64> {
        let rho = self.space.radius(e.level());
        let mut worst: f64 = 0.0;
        for rep in e.reps() {
            worst = worst.max(rep.neumann_ratio(rho)?);
        }
        Ok(1.0 - worst)
    }

    /// Certifies invertibility, bonding deeper if the Neumann ratio is too large.
    pub fn group_element(&self, e: BHolElement) -> Result<GermGroupElement> {
        for n in e.level()..=self.space.levels() {
            let b = self.space.bond(&e, n)?;
            let margin = self.invertibility_margin(&b)?;
            if margin > 0.0 {
                return Ok(GermGroupElement {
                    certificate: Certificate {
                        kind: CertificateKind::Invertible,
                        budget: 1.0,
                        margin,
                    },
                    element: b,
                });
            }
        }
        Err(Error::Domain(
            "no level certifies invertibility (Neumann ratio ≥ 1)".into(),
        ))
    }

    pub fn zero(&self, n: usize) -> Result<LocalGermElement> {
        self.local(self.space.zero(n)?)
    }

    pub fn identity(&self, n: usize) -> Result<GermGroupElement> {
        let rho = self.space.radius(n);
        let reps = self
            .space
            .anchors()
            .iter()
            .map(|a| {
                TruncatedSeries::identity(self.space.space(), a.clone(), self.space.degree_bound(), rho)
            })
            .collect::<Result<Vec<_>>>()?;
        self.group_element(self.space.element(n, reps)?)
    }

    fn common(&self, a: &BHolElement, b: &BHolElement) -> Result<(BHolElement, BHolElement)> {
        let n = a.level().max(b.level());
        Ok((self.space.bond(a, n)?, self.space.bond(b, n)?))
    }

    fn per_anchor<F>(&self, a: &BHolElement, b: &BHolElement, f: F) -> Result<BHolElement>
    where
        F: Fn(&TruncatedSeries, &TruncatedSeries) -> Result<TruncatedSeries>,
    {
        let (a, b) = self.common(a, b)?;
        let reps = a
            .reps()
            .iter()
            .zip(b.reps())
            .map(|(x, y)| f(x, y))
            .collect::<Result<Vec<_>>>()?;
        self.space.element(a.level(), reps)
    }

    fn map_reps<F>(&self, a: &BHolElement, f: F) -> Result<BHolElement>
    where
        F: Fn(&TruncatedSeries) -> Result<TruncatedSeries>,
    {
        let reps = a.reps().iter().map(f).collect::<Result<Vec<_>>>()?;
        self.space.element(a.level(), reps)
    }

    /// Germ BCH product: the Dynkin series evaluated with series arguments, with the
    /// BCH truncation remainder added to every tail bound.
    pub fn germ_bch(&self, x: &LocalGermElement, y: &LocalGermElement) -> Result<LocalGermElement> {
        let (xe, ye) = self.common(&x.element, &y.element)?;
        let s = xe.norm_upper() + ye.norm_upper();
        if s >= self.lie.bch_radius() {
            return Err(Error::Domain(format!(
                "germ BCH budget exceeded: ‖x‖ + ‖y‖ = {s:.6} ≥ {:.6}",
                self.lie.bch_radius()
            )));
        }
        let rem = self.lie.bch_remainder(s);
        let table = self.lie.table();
        let out = self.per_anchor(&xe, &ye, |a, b| Ok(table.evaluate(a, b)?.add_tail(rem)))?;
        self.local(out)
    }

    /// `EXP(η) = exp ∘ η`.
    pub fn exp(&self, x: &BHolElement) -> Result<GermGroupElement> {
        self.group_element(self.map_reps(x, |s| s.exp())?)
    }

    /// `LOG(γ) = log ∘ γ` on the principal branch, bonding deeper if needed.
    pub fn log(&self, g: &GermGroupElement) -> Result<BHolElement> {
        let mut last = None;
        for n in g.level()..=self.space.levels() {
            let b = self.space.bond(&g.element, n)?;
            match self.map_reps(&b, |s| s.log()) {
                Ok(l) => return Ok(l),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or_else(|| Error::Domain("log: no level available".into())))
    }

    pub fn group_mul(&self, g: &GermGroupElement, h: &GermGroupElement) -> Result<GermGroupElement> {
        self.group_element(self.per_anchor(&g.element, &h.element, |a, b| a.mul(b))?)
    }

    pub fn group_inv(&self, g: &GermGroupElement) -> Result<GermGroupElement> {
        let rho = self.space.radius(g.level());
        self.group_element(self.map_reps(&g.element, |s| s.invert_with_min_radius(rho))?)
    }

    /// `g^k` for `k ≥ 0`.
    pub fn group_pow(&self, g: &GermGroupElement, k: usize) -> Result<GermGroupElement> {
        let mut acc = self.identity(g.level())?;
        for _ in 0..k {
            acc = self.group_mul(&acc, g)?;
        }
        Ok(acc)
    }

    /// Certified operator bound `R = max_a ‖γ‖·‖γ⁻¹‖/4` of `η ↦ γ η γ⁻¹`.
    pub fn ad_bound(&self, g: &GermGroupElement) -> Result<f64> {
        let inv = self.group_inv(g)?;
        let (g, inv) = self.common(&g.element, &inv.element)?;
        let rho = self.space.radius(g.level());
        let mut r: f64 = 0.0;
        for (a, b) in g.reps().iter().zip(inv.reps()) {
            let c = self.space.space().product_constant(&self.space.space());
            r = r.max(c * c * a.majorant_norm(rho)? * b.majorant_norm(rho)?);
        }
        Ok(r)
    }

    /// `AD(γ).η = γ η γ⁻¹`.
    pub fn ad(&self, g: &GermGroupElement, eta: &BHolElement) -> Result<BHolElement> {
        let inv = self.group_inv(g)?;
        let left = self.per_anchor(&g.element, eta, |a, b| a.mul(b))?;
        self.per_anchor(&left, &inv.element, |a, b| a.mul(b))
    }

    /// Lie-algebra-valued germ in the BCH domain, `‖η‖ ≤ norm` at level `n`, random
    /// polynomial of degree ≤ `degree`.
    pub fn random_algebra_germ<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        n: usize,
        degree: usize,
        norm: f64,
    ) -> Result<BHolElement> {
        random_germ(&self.space, rng, n, degree, norm)
    }

    pub fn local_to_json(&self, x: &LocalGermElement) -> Result<String> {
        doc_to_json(&x.element, x.certificate)
    }

    pub fn group_to_json(&self, g: &GermGroupElement) -> Result<String> {
        doc_to_json(&g.element, g.certificate)
    }

    /// Parses a local germ; the certificate is recomputed at the stored level.
    pub fn local_from_json(&self, s: &str) -> Result<LocalGermElement> {
        let (e, cert) = self.doc_from_json(s)?;
        let level = e.level();
        let x = match cert.kind {
            CertificateKind::Omega => self.local(e)?,
            CertificateKind::Invertible => {
                return Err(Error::Structural("expected a local germ certificate".into()))
            }
            kind => self.certify(&e, kind)?,
        };
        if x.level() != level {
            return Err(Error::Domain("stored certificate does not hold at the stored level".into()));
        }
        Ok(x)
    }

    pub fn group_from_json(&self, s: &str) -> Result<GermGroupElement> {
        let (e, cert) = self.doc_from_json(s)?;
        if cert.kind != CertificateKind::Invertible {
            return Err(Error::Structural("expected an invertibility certificate".into()));
        }
        let level = e.level();
        let g = self.group_element(e)?;
        if g.level() != level {
            return Err(Error::Domain("stored certificate does not hold at the stored level".into()));
        }
        Ok(g)
    }

    fn doc_from_json(&self, s: &str) -> Result<(BHolElement, Certificate)> {
        let doc: GermDoc = serde_json::from_str(s)?;
        let reps = doc
            .reps
            .iter()
            .map(|v| TruncatedSeries::from_json(&v.to_string()))
            .collect::<Result<Vec<_>>>()?;
        Ok((self.space.element(doc.level, reps)?, doc.certificate))
    }
}

fn doc_to_json(e: &BHolElement, certificate: Certificate) -> Result<String> {
    let reps = e
        .reps()
        .iter()
        .map(|r| Ok(serde_json::from_str::<Value>(&r.to_json()?)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(serde_json::to_string(&GermDoc {
        level: e.level(),
        certificate,
        reps,
    })?)
}

/// Random polynomial germ with majorant `norm` at level `n`. Anchor balls that are
/// pairwise disjoint get independent polynomials; otherwise one polynomial around
/// the first anchor is re-expanded at every anchor.
pub fn random_germ<R: Rng + ?Sized>(
    space: &GermSpace,
    rng: &mut R,
    n: usize,
    degree: usize,
    norm: f64,
) -> Result<BHolElement> {
    let rho = space.radius(n);
    let anchors = space.anchors();
    let disjoint = anchors
        .iter()
        .enumerate()
        .all(|(i, a)| anchors.iter().skip(i + 1).all(|b| dist(a, b) >= 2.0 * rho));
    let e = if disjoint {
        let reps = anchors
            .iter()
            .map(|a| {
                let decay = rng.random_range(0.3..1.0);
                random_series(rng, space.space(), a.clone(), space.degree_bound(), degree, rho, 1.0, decay)
            })
            .collect();
        space.element(n, reps)?
    } else {
        let big = anchors.iter().map(|a| dist(a, &anchors[0])).fold(0.0, f64::max) + rho;
        let entries: Vec<_> = exponents(space.dim(), degree.min(space.degree_bound()))
            .into_iter()
            .map(|e| {
                let w = rng.random_range(0.2..1.0) * big.powi(-((e[0] + e[1]) as i32));
                (e, random_coeff_with_norm(rng, space.space(), w))
            })
            .collect();
        let p = TruncatedSeries::from_entries(
            space.space(),
            anchors[0].clone(),
            space.degree_bound(),
            big,
            entries,
            0.0,
        )?;
        space.element_from_global(n, &p)?
    };
    let m = e.norm_upper();
    let reps = e
        .reps()
        .iter()
        .map(|s| s.scale(Complex64::new(norm / m, 0.0)))
        .collect();
    space.element(n, reps)
}

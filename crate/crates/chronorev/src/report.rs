//! Machine-readable analysis reports. Every report serializes
//! deterministically: map keys are ordered, sequences follow canonical pair
//! order, and no wall-clock state is embedded.

use serde::{Deserialize, Serialize};

use crate::data_model::OptionId;
use crate::dataset::{AnalysisError, Dataset};
use crate::fechner::{build_fechner_relation, predict_all, FechnerOptions, PairPredictions};
use crate::rationalize::{
    check_necessary_rationalizability, ModelClass, RationalizabilityReport, RationalizeError,
};
use crate::relations::{Relation, RevelationEdge, Strength};
use crate::symmetric::{
    build_symmetric_relation, predict_sign_out_of_sample, SignForecast, SymmetricOptions,
    TriangulatedEdge,
};
use crate::unrestricted::{
    build_rt_relation, density_ratio_check, DensityRatioOptions, DensityRatioReport,
    DominanceOptions, DominanceVerdict,
};

pub const SCHEMA_VERSION: &str = "1";

/// Full configuration for an analysis run.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub dominance: DominanceOptions,
    pub density: DensityRatioOptions,
    pub symmetric: SymmetricOptions,
    pub fechner: FechnerOptions,
}

/// Which criteria families to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSelection {
    Unrestricted,
    Symmetric,
    Fechner,
    All,
}

impl ClassSelection {
    fn wants(self, class: ClassSelection) -> bool {
        self == ClassSelection::All || self == class
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
}

impl Meta {
    fn new() -> Self {
        Meta {
            tool: "chronorev",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Cycle diagnostic for one relation.
#[derive(Debug, Clone, Serialize)]
pub struct CycleDiagnostic {
    pub consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<OptionId>>,
}

fn cycle_diagnostic(rel: &Relation) -> CycleDiagnostic {
    let witness = rel.inconsistent_cycle();
    CycleDiagnostic {
        consistent: witness.is_none(),
        witness,
    }
}

/// Per-directed-pair entry of the unrestricted section.
#[derive(Debug, Clone, Serialize)]
pub struct UnrestrictedPairReport {
    pub x: OptionId,
    pub y: OptionId,
    pub p: f64,
    pub q: f64,
    pub verdict: DominanceVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_strength: Option<Strength>,
    pub density_ratio: DensityRatioReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnrestrictedSection {
    pub pairs: Vec<UnrestrictedPairReport>,
    pub relation: Relation,
    pub closure: Relation,
    pub cycle: CycleDiagnostic,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetricSection {
    pub frequency_edges: Vec<RevelationEdge>,
    pub triangulated: Vec<TriangulatedEdge>,
    pub diagnostics: Vec<String>,
    pub relation_frequency: Relation,
    pub relation_triangulated: Relation,
    pub closure: Relation,
    pub cycle: CycleDiagnostic,
    pub sign_forecasts: Vec<SignForecast>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossPivotReport {
    pub from: OptionId,
    pub to: OptionId,
    pub strength: Strength,
    pub pivot: OptionId,
}

#[derive(Debug, Clone, Serialize)]
pub struct FechnerSection {
    pub cross_pivot_edges: Vec<CrossPivotReport>,
    pub relation_cross_pivot: Relation,
    pub closure: Relation,
    pub cycle: CycleDiagnostic,
    pub predictions: Vec<PairPredictions>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub schema: &'static str,
    pub meta: Meta,
    pub options: Vec<OptionId>,
    pub observed_pairs: Vec<[OptionId; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unrestricted: Option<UnrestrictedSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<SymmetricSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fechner: Option<FechnerSection>,
}

/// Runs the selected criteria over the dataset and assembles the report.
pub fn analyze(
    ds: &Dataset,
    selection: ClassSelection,
    config: &AnalysisConfig,
) -> Result<AnalyzeReport, AnalysisError> {
    let observed: Vec<[OptionId; 2]> = ds
        .observed_pairs()
        .iter()
        .map(|k| [k.first().clone(), k.second().clone()])
        .collect();

    let unrestricted = if selection.wants(ClassSelection::Unrestricted) {
        let analysis = build_rt_relation(ds, &config.dominance);
        let mut pairs = Vec::with_capacity(analysis.reveals.len());
        for r in &analysis.reveals {
            let density = density_ratio_check(ds, &r.x, &r.y, &config.density)?;
            pairs.push(UnrestrictedPairReport {
                x: r.x.clone(),
                y: r.y.clone(),
                p: r.p,
                q: r.verdict.q,
                verdict: r.verdict,
                edge_strength: r.edge.as_ref().map(|e| e.strength),
                density_ratio: density,
            });
        }
        let cycle = cycle_diagnostic(&analysis.relation);
        Some(UnrestrictedSection {
            pairs,
            relation: analysis.relation,
            closure: analysis.closure,
            cycle,
        })
    } else {
        None
    };

    let symmetric = if selection.wants(ClassSelection::Symmetric) {
        let analysis = build_symmetric_relation(ds, &config.symmetric)?;
        let union = analysis.r_frequency.union(&analysis.r_triangulated);
        let cycle = cycle_diagnostic(&union);
        let sign_forecasts = ds
            .unobserved_pairs()
            .iter()
            .map(|k| predict_sign_out_of_sample(&analysis, k.first(), k.second()))
            .collect();
        Some(SymmetricSection {
            frequency_edges: analysis.frequency_edges,
            triangulated: analysis.triangulated,
            diagnostics: analysis.diagnostics,
            relation_frequency: analysis.r_frequency,
            relation_triangulated: analysis.r_triangulated,
            closure: analysis.closure,
            cycle,
            sign_forecasts,
        })
    } else {
        None
    };

    let fechner = if selection.wants(ClassSelection::Fechner) {
        let analysis = build_fechner_relation(ds, &config.symmetric, &config.fechner)?;
        let union = analysis
            .symmetric
            .r_frequency
            .union(&analysis.r_cross_pivot);
        let cycle = cycle_diagnostic(&union);
        let cross_pivot_edges = analysis
            .cross_pivot_edges
            .iter()
            .map(|(e, z)| CrossPivotReport {
                from: e.from.clone(),
                to: e.to.clone(),
                strength: e.strength,
                pivot: z.clone(),
            })
            .collect();
        let predictions = predict_all(ds, &config.fechner);
        Some(FechnerSection {
            cross_pivot_edges,
            relation_cross_pivot: analysis.r_cross_pivot,
            closure: analysis.closure,
            cycle,
            predictions,
        })
    } else {
        None
    };

    Ok(AnalyzeReport {
        schema: SCHEMA_VERSION,
        meta: Meta::new(),
        options: ds.options(),
        observed_pairs: observed,
        unrestricted,
        symmetric,
        fechner,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictReport {
    pub schema: &'static str,
    pub meta: Meta,
    pub predictions: Vec<PairPredictions>,
}

/// Predicts out-of-sample choice probabilities. With `pair` set, only that
/// unordered pair is reported.
pub fn predict_report(
    ds: &Dataset,
    pair: Option<(&OptionId, &OptionId)>,
    config: &AnalysisConfig,
) -> Result<PredictReport, AnalysisError> {
    let mut predictions = predict_all(ds, &config.fechner);
    if let Some((x, y)) = pair {
        predictions.retain(|p| (&p.x == x && &p.y == y) || (&p.x == y && &p.y == x));
        if predictions.is_empty() {
            return Err(AnalysisError::NoPivot(x.to_string(), y.to_string()));
        }
    }
    Ok(PredictReport {
        schema: SCHEMA_VERSION,
        meta: Meta::new(),
        predictions,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub schema: &'static str,
    pub meta: Meta,
    pub classes: Vec<RationalizabilityReport>,
    pub pass: bool,
}

/// Runs the necessary-condition falsification for every class.
pub fn check_report(
    ds: &Dataset,
    config: &AnalysisConfig,
) -> Result<CheckReport, RationalizeError> {
    let mut classes = Vec::new();
    for class in [
        ModelClass::Unrestricted,
        ModelClass::Symmetric,
        ModelClass::Fechner,
    ] {
        classes.push(check_necessary_rationalizability(
            ds,
            class,
            &config.dominance,
            &config.symmetric,
            &config.fechner,
        )?);
    }
    let pass = classes.iter().all(|c| c.pass);
    Ok(CheckReport {
        schema: SCHEMA_VERSION,
        meta: Meta::new(),
        classes,
        pass,
    })
}

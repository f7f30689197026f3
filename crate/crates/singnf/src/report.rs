//! Deterministic text and JSON rendering of run results.

use crate::moduli::{LogStep, RunResult};
use crate::poly::Var;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Serialize)]
struct FamilyJson {
    base: String,
    moduli: Vec<String>,
    params: Vec<String>,
}

#[derive(Serialize)]
struct ConstraintJson {
    equation: String,
}

#[derive(Serialize)]
struct EquationJson {
    poly: String,
    pre_completion: String,
    values: BTreeMap<String, String>,
    constraints: Vec<ConstraintJson>,
    invariants: Vec<String>,
}

#[derive(Serialize)]
#[serde(tag = "kind")]
enum LogStepJson {
    #[serde(rename = "substitution")]
    Substitution {
        x: String,
        y: String,
        filtration: u32,
    },
    #[serde(rename = "scaling")]
    Scaling { cx: String, cy: String },
    #[serde(rename = "axis_completion")]
    AxisCompletion { monomial: String },
}

#[derive(Serialize)]
struct FacetJson {
    v0: (u32, u32),
    v1: (u32, u32),
    weight: (i64, i64),
    scaled_weight: (i64, i64),
    lattice_length: usize,
    normalized: bool,
    smooth: bool,
    exempt: bool,
}

#[derive(Serialize)]
struct PolygonJson {
    vertices: Vec<(u32, u32)>,
    facets: Vec<FacetJson>,
    d: i64,
    normalized: bool,
}

#[derive(Serialize)]
struct PassJson {
    level: i64,
    inner_iterations: usize,
    residual_orders: Vec<u32>,
    filtrations: Vec<u32>,
}

#[derive(Serialize)]
struct ResultJson {
    input: String,
    family: FamilyJson,
    equation: EquationJson,
    log: Vec<LogStepJson>,
    polygon: PolygonJson,
    mu: u64,
    determinacy_bound: u32,
    inner_modality: usize,
    passes: Vec<PassJson>,
    diagnostics: Vec<String>,
}

fn log_steps_json(result: &RunResult) -> Vec<LogStepJson> {
    result
        .log
        .steps
        .iter()
        .map(|s| match s {
            LogStep::Substitution(phi) => LogStepJson::Substitution {
                x: format!("x+{}", phi.gx),
                y: format!("y+{}", phi.gy),
                filtration: phi.filtration,
            },
            LogStep::Scaling { cx, cy } => LogStepJson::Scaling {
                cx: cx.to_string(),
                cy: cy.to_string(),
            },
            LogStep::AxisCompletion(m) => LogStepJson::AxisCompletion {
                monomial: m.to_string(),
            },
        })
        .collect()
}

/// JSON rendering: struct fields in declaration order, map keys sorted.
pub fn render_json(result: &RunResult) -> String {
    let params = result.family.parameter_names();
    let values: BTreeMap<String, String> = params
        .iter()
        .zip(&result.equation.values)
        .map(|(p, (_, v))| (p.clone(), v.to_string()))
        .collect();
    let constraints = result
        .equation
        .constraints
        .iter()
        .map(|c| ConstraintJson {
            equation: format!("{}*c1^{}*c3^{} = 1", c.coeff, c.e1, c.e3),
        })
        .chain(result.equation.solved_powers.iter().map(|s| ConstraintJson {
            equation: format!(
                "{}^{} = {}",
                match s.var {
                    Var::X => "c1",
                    Var::Y => "c3",
                },
                s.power,
                s.value
            ),
        }))
        .collect();
    let invariants = result
        .equation
        .invariants
        .iter()
        .map(|i| format!("value({})^{} = {}", i.monomial, i.power, i.value))
        .collect();
    let json = ResultJson {
        input: result.input.to_string(),
        family: FamilyJson {
            base: result.family.base.to_string(),
            moduli: result.family.moduli.iter().map(|m| m.to_string()).collect(),
            params,
        },
        equation: EquationJson {
            poly: result.equation.poly.to_string(),
            pre_completion: result.equation.pre_completion.to_string(),
            values,
            constraints,
            invariants,
        },
        log: log_steps_json(result),
        polygon: PolygonJson {
            vertices: result.polygon.vertices.iter().map(|v| (v.ex, v.ey)).collect(),
            facets: result
                .polygon
                .facets
                .iter()
                .zip(&result.polygon.pw.weights)
                .zip(&result.norm_report.facets)
                .map(|((fc, sw), nr)| FacetJson {
                    v0: (fc.v0.ex, fc.v0.ey),
                    v1: (fc.v1.ex, fc.v1.ey),
                    weight: (fc.weight.wx, fc.weight.wy),
                    scaled_weight: (sw.wx, sw.wy),
                    lattice_length: fc.lattice_length(),
                    normalized: nr.normalized,
                    smooth: nr.smooth,
                    exempt: nr.exempt,
                })
                .collect(),
            d: result.polygon.pw.d,
            normalized: result.norm_report.normalized,
        },
        mu: result.mu,
        determinacy_bound: result.determinacy_bound,
        inner_modality: result.inner_modality,
        passes: result
            .passes
            .iter()
            .map(|p| PassJson {
                level: p.level,
                inner_iterations: p.residuals.len(),
                residual_orders: p.residuals.iter().filter_map(|r| r.order()).collect(),
                filtrations: p.filtrations.clone(),
            })
            .collect(),
        diagnostics: result.diagnostics.clone(),
    };
    serde_json::to_string_pretty(&json).expect("serialization cannot fail")
}

/// Plain-text rendering.
pub fn render_text(result: &RunResult, trace: bool) -> String {
    let mut out = String::new();
    let push = |out: &mut String, s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    push(&mut out, format!("INPUT: {}", result.input));
    let vs: Vec<String> = result
        .polygon
        .vertices
        .iter()
        .map(|v| format!("({},{})", v.ex, v.ey))
        .collect();
    push(
        &mut out,
        format!(
            "POLYGON: vertices {}; d = {}; normalized = {}",
            vs.join(" "),
            result.polygon.pw.d,
            result.norm_report.normalized
        ),
    );
    push(
        &mut out,
        format!(
            "MU: {}  DETERMINACY_BOUND: {}  INNER_MODALITY: {}",
            result.mu, result.determinacy_bound, result.inner_modality
        ),
    );
    push(&mut out, format!("FAMILY: {}", result.family.render()));
    push(&mut out, format!("EQUATION: {}", result.equation.poly));
    let params: Vec<String> = result
        .family
        .parameter_names()
        .iter()
        .zip(&result.equation.values)
        .map(|(p, (m, v))| format!("{p} = {v} ({m})"))
        .collect();
    push(
        &mut out,
        format!(
            "PARAMETERS: {}",
            if params.is_empty() {
                "(none)".to_string()
            } else {
                params.join(", ")
            }
        ),
    );
    if !result.equation.constraints.is_empty() {
        let cs: Vec<String> = result
            .equation
            .constraints
            .iter()
            .map(|c| format!("{}*c1^{}*c3^{} = 1", c.coeff, c.e1, c.e3))
            .collect();
        push(&mut out, format!("CONSTRAINTS: {}", cs.join("; ")));
        for s in &result.equation.solved_powers {
            push(
                &mut out,
                format!(
                    "  {}^{} = {}",
                    match s.var {
                        Var::X => "c1",
                        Var::Y => "c3",
                    },
                    s.power,
                    s.value
                ),
            );
        }
        for i in &result.equation.invariants {
            push(
                &mut out,
                format!("  value({})^{} = {}", i.monomial, i.power, i.value),
            );
        }
    }
    if result.log.steps.is_empty() {
        push(&mut out, "LOG: (identity)".to_string());
    } else {
        push(&mut out, format!("LOG: {} step(s)", result.log.steps.len()));
        for (i, s) in result.log.steps.iter().enumerate() {
            let line = match s {
                LogStep::Substitution(phi) => format!(
                    "  {}. x -> x+{}; y -> y+{} (filtration {})",
                    i + 1,
                    phi.gx,
                    phi.gy,
                    phi.filtration
                ),
                LogStep::Scaling { cx, cy } => {
                    format!("  {}. x -> {cx}*x; y -> {cy}*y", i + 1)
                }
                LogStep::AxisCompletion(m) => format!("  {}. add {m}", i + 1),
            };
            push(&mut out, line);
        }
    }
    if trace {
        for p in &result.passes {
            let orders: Vec<String> = p
                .residuals
                .iter()
                .map(|r| r.order().map_or("0".into(), |o| o.to_string()))
                .collect();
            push(
                &mut out,
                format!(
                    "TRACE: level {} inner_iterations {} residual_orders [{}] filtrations {:?}",
                    p.level,
                    p.residuals.len(),
                    orders.join(","),
                    p.filtrations
                ),
            );
            for r in &p.residuals {
                push(&mut out, format!("  residual: {r}"));
            }
        }
    }
    for d in &result.diagnostics {
        push(&mut out, format!("DIAGNOSTIC: {d}"));
    }
    out
}

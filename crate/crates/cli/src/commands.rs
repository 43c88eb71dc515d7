use serde::Serialize;
use toda_core::coords::{pi_from, theta_from, theta_prime};
use toda_core::flows::{trajectory, Family, TrajectoryRecord};
use toda_core::inverse::{lanczos_reconstruct, stieltjes_reconstruct};
use toda_core::poisson::{
    ah_formula, bracket as tensor_bracket, verify_formula_vs_tensor, xi_bracket, Chart, ChartPoint,
    Observable,
};
use toda_core::spectral::{divisor, eigen};
use toda_core::verify::{run, Suite};
use toda_core::weyl::to_quotient;
use toda_core::{JacobiMatrix, PolyQuotient, RationalHerglotz};

use crate::input::Input;
use crate::{ChartArg, CliError, FamilyArg, Method};

fn line<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string(value).map_err(|e| CliError::Input(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct SpectrumOut {
    lambdas: Vec<f64>,
    rhos: Vec<f64>,
    gammas: Vec<f64>,
}

pub fn spectrum(input: &Input) -> Result<String, CliError> {
    let out = match input.matrix() {
        Some(l) => {
            let sd = eigen(l)?;
            if sd.conditioning {
                log::warn!("eigenvalues closer than the conditioning gap");
            }
            SpectrumOut {
                gammas: if l.dim() < 2 {
                    Vec::new()
                } else {
                    divisor(l)?.gammas
                },
                lambdas: sd.lambdas,
                rhos: sd.rhos,
            }
        }
        None => {
            let w = input.weyl()?;
            let gammas = if w.dim() < 2 {
                Vec::new()
            } else {
                toda_core::weyl::zeros(&w)?.gammas
            };
            SpectrumOut {
                lambdas: w.poles().to_vec(),
                rhos: w.residues().to_vec(),
                gammas,
            }
        }
    };
    line(&out)
}

#[derive(Serialize)]
struct WeylOut {
    #[serde(flatten)]
    w: RationalHerglotz,
    #[serde(flatten)]
    quotient: PolyQuotient,
}

pub fn weyl(input: &Input) -> Result<String, CliError> {
    let w = input.weyl()?;
    let quotient = to_quotient(&w);
    line(&WeylOut { w, quotient })
}

#[derive(Serialize)]
struct BothOut {
    cf: JacobiMatrix,
    lanczos: JacobiMatrix,
    discrepancy: f64,
}

pub fn reconstruct(input: &Input, method: Method) -> Result<String, CliError> {
    let cf =
        || -> Result<JacobiMatrix, CliError> { Ok(stieltjes_reconstruct(&input.quotient()?)?) };
    let lanczos = || -> Result<JacobiMatrix, CliError> {
        Ok(lanczos_reconstruct(&input.weyl()?.to_spectral()?)?)
    };
    match method {
        Method::Cf => line(&cf()?),
        Method::Lanczos => line(&lanczos()?),
        Method::Both => {
            let (cf, lanczos) = (cf()?, lanczos()?);
            let discrepancy = cf.max_abs_diff(&lanczos);
            log::info!("cf vs lanczos discrepancy {discrepancy:e}");
            line(&BothOut {
                cf,
                lanczos,
                discrepancy,
            })
        }
    }
}

#[derive(Serialize)]
struct CoordsOut {
    lambdas: Vec<f64>,
    rhos: Vec<f64>,
    thetas: Vec<f64>,
    theta_prime: Vec<f64>,
    gammas: Vec<f64>,
    pis: Vec<f64>,
    casimir: f64,
}

pub fn coords(input: &Input) -> Result<String, CliError> {
    let w = input.weyl()?;
    let mut out = CoordsOut {
        lambdas: w.poles().to_vec(),
        rhos: w.residues().to_vec(),
        thetas: Vec::new(),
        theta_prime: Vec::new(),
        gammas: Vec::new(),
        pis: Vec::new(),
        casimir: w.poles().iter().sum(),
    };
    if w.dim() >= 2 {
        out.thetas = theta_from(&w)?.thetas;
        out.theta_prime = theta_prime(&w)?;
        let dq = pi_from(&w)?;
        out.gammas = dq.gammas;
        out.pis = dq.pis;
        out.casimir = dq.casimir;
    }
    line(&out)
}

pub fn flow(
    input: &Input,
    family: FamilyArg,
    j: usize,
    t0: f64,
    t1: f64,
    samples: usize,
    emit_csv: bool,
) -> Result<String, CliError> {
    if samples == 0 {
        return Err(CliError::Input("--samples must be at least 1".into()));
    }
    let times: Vec<f64> = (0..samples)
        .map(|i| {
            if samples == 1 {
                t0
            } else {
                t0 + (t1 - t0) * i as f64 / (samples - 1) as f64
            }
        })
        .collect();
    let family = match family {
        FamilyArg::H => Family::H,
        FamilyArg::T => Family::T,
    };
    let records = trajectory(&input.weyl()?, family, j, &times)?;
    if emit_csv {
        csv_table(&records)
    } else {
        records.iter().map(line).collect()
    }
}

fn csv_table(records: &[TrajectoryRecord]) -> Result<String, CliError> {
    let to_io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = records.first() {
        let n = first.lambdas.len();
        let mut header = vec!["t".to_string()];
        let cols = |name: &str, range: std::ops::Range<usize>| -> Vec<String> {
            range.map(|k| format!("{name}_{k}")).collect()
        };
        header.extend(cols("v", 0..n));
        header.extend(cols("c", 0..n - 1));
        header.extend(cols("lambda", 0..n));
        header.extend(cols("rho", 0..n));
        header.extend(cols("theta", 1..first.thetas.len() + 1));
        header.extend(cols("gamma", 1..first.gammas.len() + 1));
        header.extend(cols("pi", 1..first.pis.len() + 1));
        w.write_record(&header).map_err(to_io)?;
    }
    for r in records {
        let row: Vec<String> = std::iter::once(r.t)
            .chain(r.matrix.diag().iter().copied())
            .chain(r.matrix.off_diag().iter().copied())
            .chain(r.lambdas.iter().copied())
            .chain(r.rhos.iter().copied())
            .chain(r.thetas.iter().copied())
            .chain(r.gammas.iter().copied())
            .chain(r.pis.iter().copied())
            .map(|x| format!("{x:?}"))
            .collect();
        w.write_record(&row).map_err(to_io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    String::from_utf8(bytes).map_err(|e| CliError::Input(e.to_string()))
}

#[derive(Serialize)]
struct BracketOut {
    chart: Chart,
    lambda: f64,
    mu: f64,
    formula: f64,
    tensor: f64,
    relative_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    xi: Option<f64>,
}

pub fn bracket(input: &Input, lambda: f64, mu: f64, chart: ChartArg) -> Result<String, CliError> {
    let w = input.weyl()?;
    let chart = match chart {
        ChartArg::Restricted => Chart::Restricted,
        ChartArg::Unrestricted => Chart::Unrestricted,
    };
    let pt = ChartPoint::from_weyl(&w, chart)?;
    let restricted = chart == Chart::Restricted;
    let out = BracketOut {
        chart,
        lambda,
        mu,
        formula: ah_formula(&w, lambda, mu, restricted)?,
        tensor: tensor_bracket(&Observable::weyl_at(lambda), &Observable::weyl_at(mu), &pt)?,
        relative_gap: verify_formula_vs_tensor(&pt, lambda, mu)?,
        xi: if restricted {
            Some(xi_bracket(&w, lambda, mu)?)
        } else {
            None
        },
    };
    line(&out)
}

/// The residual map and, if some check failed, a summary of the failures.
pub fn verify(
    suite: &str,
    seed: u64,
    n: usize,
    tol: Option<f64>,
) -> Result<(String, Option<String>), CliError> {
    let suite: Suite = suite.parse()?;
    let mut report = run(suite, seed, n)?;
    if let Some(t) = tol {
        report = report.with_tolerance(t);
    }
    if report.near_boundary {
        log::warn!("some sample points lie near the chart boundary");
    }
    let failures: Vec<String> = report
        .failures()
        .into_iter()
        .map(|(k, r, t)| format!("{k} = {r:e} > {t:e}"))
        .collect();
    for f in &failures {
        log::error!("{f}");
    }
    let text = line(&report.residuals)?;
    Ok((text, (!failures.is_empty()).then(|| failures.join(", "))))
}

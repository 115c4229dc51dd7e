//! End-to-end emulation of a filtering experiment on a two-qutrit Werner
//! state: noisy preparation, tomography, qubit filtering, tomography of the
//! filtered pair, and certificates before and after.

use serde::{Deserialize, Serialize};

use crate::certify::{
    chsh_horodecki, dense_coding_delta, fef, fef2_exact, gurvits_ball, one_distillable, ppt_min_eig, Certificate,
};
use crate::error::Result;
use crate::filterops::{apply_filter, filter_rotation, qubit_projection};
use crate::qmat::{uhlmann_fidelity, DensityMatrix, Side};
use crate::random::derive_seed;
use crate::states::{noisy_surrogate, werner, NoiseSpec};
use crate::steer::sr_state_lower_bound;
use crate::tomo::{bootstrap_error, mle_reconstruct, qubit_frame, qutrit_bases, simulate_counts, MLE_MAX_ITER, MLE_TOL};
use crate::filterops::rotated_filtered_state;

/// Version of the [`PipelineReport`] layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// Mean counts per tomography setting.
    pub shots: u64,
    /// Poisson resamples for error bars.
    pub bootstrap: usize,
    /// Restarts of the heuristic searches.
    pub restarts: usize,
    /// Measurement settings of the steering see-saw.
    pub sr_settings: usize,
    /// See-saw restarts for steering robustness.
    pub sr_restarts: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { shots: 20_000, bootstrap: 20, restarts: 32, sr_settings: 3, sr_restarts: 10 }
    }
}

/// Value with a bootstrap error bar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageReport {
    /// Fidelity of the reconstruction with the ideal state of this stage.
    pub fidelity: Estimate,
    pub certificates: Vec<Certificate>,
    pub steering_robustness: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub v: f64,
    pub noise: NoiseSpec,
    pub seed: u64,
    pub options: PipelineOptions,
    /// Probability that both filters pass on the prepared state.
    pub filter_success_probability: f64,
    pub before: StageReport,
    pub after: StageReport,
    pub chsh_after: Estimate,
    pub dense_coding_after: Estimate,
}

impl PipelineReport {
    pub fn certificate(&self, after: bool, name: crate::certify::CertName) -> Option<&Certificate> {
        let stage = if after { &self.after } else { &self.before };
        stage.certificates.iter().find(|c| c.name == name)
    }
}

pub fn run_pipeline(v: f64, noise: &NoiseSpec, seed: u64, opts: &PipelineOptions) -> Result<PipelineReport> {
    let ideal = werner::<f64>(3, v)?;
    let prepared = noisy_surrogate(&ideal, noise)?;

    let counts = simulate_counts(&prepared, &qutrit_bases(), opts.shots, derive_seed(seed, 1), &format!("W3({v})"))?;
    let rho = mle_reconstruct(&counts, MLE_MAX_ITER, MLE_TOL)?.state;

    let fa = qubit_projection::<f64>(3, (1, 2), Side::A)?;
    let fb = qubit_projection::<f64>(3, (1, 2), Side::B)?;
    let (filtered, p_success) = apply_filter(&prepared, &fa, &fb)?;
    let filtered = filtered.conjugate_by(&filter_rotation());
    let ideal_f = rotated_filtered_state(v)?;
    let counts_f = simulate_counts(&filtered, &qubit_frame(), opts.shots, derive_seed(seed, 2), &format!("W3f({v})"))?;
    let rho_f = mle_reconstruct(&counts_f, MLE_MAX_ITER, MLE_TOL)?.state;

    let boot = |c, stat: &(dyn Fn(&DensityMatrix<f64>) -> Result<f64> + Sync), value: f64, s: u64| -> Result<Estimate> {
        let (mean, stddev) = bootstrap_error(c, stat, opts.bootstrap, derive_seed(seed, s))?;
        Ok(Estimate { value, mean, stddev })
    };

    let fid = |r: &DensityMatrix<f64>| uhlmann_fidelity(r.matrix(), ideal.matrix());
    let fid_f = |r: &DensityMatrix<f64>| uhlmann_fidelity(r.matrix(), ideal_f.matrix());
    let chsh = |r: &DensityMatrix<f64>| Ok(chsh_horodecki(r)?.value);
    let delta = |r: &DensityMatrix<f64>| Ok(dense_coding_delta(r)?.value);

    let before = StageReport {
        fidelity: boot(&counts, &fid, fid(&rho)?, 3)?,
        certificates: vec![
            ppt_min_eig(&rho)?,
            one_distillable(&rho, opts.restarts, derive_seed(seed, 5))?,
            gurvits_ball(&rho),
            fef(&rho, opts.restarts, derive_seed(seed, 6))?,
            dense_coding_delta(&rho)?,
        ],
        steering_robustness: sr_state_lower_bound(&rho, opts.sr_settings, 3, opts.sr_restarts, derive_seed(seed, 7))?.value,
    };
    let mut fef_f = fef(&rho_f, opts.restarts, derive_seed(seed, 8))?;
    fef_f.value = fef_f.value.max(fef2_exact(&rho_f)?);
    let after = StageReport {
        fidelity: boot(&counts_f, &fid_f, fid_f(&rho_f)?, 4)?,
        certificates: vec![
            ppt_min_eig(&rho_f)?,
            one_distillable(&rho_f, opts.restarts, derive_seed(seed, 9))?,
            gurvits_ball(&rho_f),
            fef_f,
            chsh_horodecki(&rho_f)?,
            dense_coding_delta(&rho_f)?,
        ],
        steering_robustness: sr_state_lower_bound(&rho_f, opts.sr_settings, 2, opts.sr_restarts, derive_seed(seed, 10))?.value,
    };
    Ok(PipelineReport {
        schema_version: REPORT_SCHEMA_VERSION,
        v,
        noise: *noise,
        seed,
        options: opts.clone(),
        filter_success_probability: p_success,
        chsh_after: boot(&counts_f, &chsh, chsh(&rho_f)?, 11)?,
        dense_coding_after: boot(&counts_f, &delta, delta(&rho_f)?, 12)?,
        before,
        after,
    })
}

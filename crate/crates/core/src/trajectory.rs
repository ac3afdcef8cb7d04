use nalgebra::DVector;

/// Time-indexed record of one run, `k = 0..len()`.
///
/// Values before `k = 0` are implicitly zero. Optional channels are either
/// absent or have the same length as `states`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
    pub disturbances: Vec<DVector<f64>>,
    pub ref_states: Option<Vec<DVector<f64>>>,
    pub ref_inputs: Option<Vec<DVector<f64>>>,
    pub errors: Option<Vec<DVector<f64>>>,
    /// `||r(k)||` of the truncated tail seen by the controller's window.
    pub residual_norms: Option<Vec<f64>>,
    /// Predicted ultimate bound for the plotted norm channel, if one exists.
    pub bound: Option<f64>,
    /// Set when the run was cut short by the divergence threshold.
    pub diverged: bool,
}

impl Trajectory {
    pub fn new(
        states: Vec<DVector<f64>>,
        inputs: Vec<DVector<f64>>,
        disturbances: Vec<DVector<f64>>,
    ) -> Self {
        debug_assert_eq!(states.len(), inputs.len());
        debug_assert_eq!(states.len(), disturbances.len());
        Self {
            states,
            inputs,
            disturbances,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_norms(&self) -> Vec<f64> {
        self.states.iter().map(|x| x.norm()).collect()
    }

    /// `||e(k)||` when an error channel exists, otherwise `||x(k)||`.
    pub fn error_norms(&self) -> Vec<f64> {
        match &self.errors {
            Some(e) => e.iter().map(|x| x.norm()).collect(),
            None => self.state_norms(),
        }
    }

    /// Supremum of `norms` over the trailing `fraction` of the run.
    pub fn trailing_sup(norms: &[f64], fraction: f64) -> f64 {
        let start = ((1.0 - fraction) * norms.len() as f64).floor() as usize;
        norms[start.min(norms.len())..]
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Supremum over the last `count` samples.
    pub fn tail_sup(norms: &[f64], count: usize) -> f64 {
        let start = norms.len().saturating_sub(count);
        norms[start..].iter().copied().fold(0.0, f64::max)
    }

    pub fn check_consistent(&self) -> bool {
        let n = self.states.len();
        let opt = |v: &Option<Vec<DVector<f64>>>| v.as_ref().is_none_or(|v| v.len() == n);
        self.inputs.len() == n
            && self.disturbances.len() == n
            && opt(&self.ref_states)
            && opt(&self.ref_inputs)
            && opt(&self.errors)
            && self.residual_norms.as_ref().is_none_or(|r| r.len() == n)
    }
}

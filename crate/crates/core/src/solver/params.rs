use serde::{Deserialize, Serialize};

/// Penalty, proximal and stopping parameters of the splitting scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Penalty weight on `‖p − z‖²`.
    pub xi: f64,
    /// Augmented-Lagrangian penalty on `‖Ax − z‖²`.
    pub eta: f64,
    /// Proximal weight of the weight (`y`) step.
    pub mu1: f64,
    /// Proximal weight of the component (`x`) step.
    pub mu2: f64,
    /// Proximal weight of the auxiliary (`p`) step.
    pub mu3: f64,
    /// Lipschitz bound of `∇_x f`; 1 for weights on the simplex.
    pub lipschitz_bound: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl SolverParams {
    /// `μ₁ = 0.1`, `μ₂ = 1.1`, `μ₃ = ξ`, `η = 2ξ + 1`, `ε = 1e-8`.
    pub fn defaults_for(xi: f64) -> Self {
        Self {
            xi,
            eta: 2.0 * xi + 1.0,
            mu1: 0.1,
            mu2: 1.1,
            mu3: xi,
            lipschitz_bound: 1.0,
            tol: 1e-8,
            max_iter: 200_000,
            seed: 0,
        }
    }

    /// Defaults with the `x` proximal term switched off (`μ₂ = 0`).
    pub fn tightened_for(xi: f64) -> Self {
        Self {
            mu2: 0.0,
            ..Self::defaults_for(xi)
        }
    }

    /// Re-derive `η = 2ξ + 1` and `μ₃ = ξ` for a new penalty weight, keeping
    /// everything else.
    pub fn with_xi(&self, xi: f64) -> Self {
        Self {
            xi,
            eta: 2.0 * xi + 1.0,
            mu3: xi,
            ..self.clone()
        }
    }

    /// `2ξ²/η`, the dual-step growth coefficient.
    pub fn dual_growth(&self) -> f64 {
        2.0 * self.xi * self.xi / self.eta
    }

    /// Descent modulus `ν = min{η + μ₂ − L, η/2 − 2ξ²/η, μ₃ − 2ξ²/η, μ₁}`.
    pub fn descent_modulus(&self) -> f64 {
        let g = self.dual_growth();
        (self.eta + self.mu2 - self.lipschitz_bound)
            .min(self.eta / 2.0 - g)
            .min(self.mu3 - g)
            .min(self.mu1)
    }

    /// Classify the parameters against the sufficient-descent conditions.
    pub fn validate(&self) -> ParamMode {
        let finite = [
            self.xi,
            self.eta,
            self.mu1,
            self.mu2,
            self.mu3,
            self.lipschitz_bound,
            self.tol,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return ParamMode::Invalid("parameters must be finite".into());
        }
        if !(self.xi > 0.0) {
            return ParamMode::Invalid(format!("xi = {} must be positive", self.xi));
        }
        if !(self.eta > 0.0) {
            return ParamMode::Invalid(format!("eta = {} must be positive", self.eta));
        }
        if !(self.mu1 > 0.0) {
            return ParamMode::Invalid(format!("mu1 = {} must be positive", self.mu1));
        }
        if !(self.mu2 >= 0.0) {
            return ParamMode::Invalid(format!("mu2 = {} must be nonnegative", self.mu2));
        }
        if !(self.mu3 > 0.0) {
            return ParamMode::Invalid(format!("mu3 = {} must be positive", self.mu3));
        }
        if !(self.lipschitz_bound > 0.0) {
            return ParamMode::Invalid("Lipschitz bound must be positive".into());
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return ParamMode::Invalid("tolerance and iteration cap must be positive".into());
        }
        if self.eta <= 2.0 * self.xi {
            return ParamMode::Invalid(format!(
                "eta = {} must exceed 2 xi = {}",
                self.eta,
                2.0 * self.xi
            ));
        }
        let g = self.dual_growth();
        if self.mu3 <= g {
            return ParamMode::Invalid(format!("mu3 = {} must exceed 2 xi^2 / eta = {g}", self.mu3));
        }
        if self.mu2 > self.lipschitz_bound {
            return ParamMode::Strict {
                nu: self.descent_modulus(),
            };
        }
        if self.eta > self.lipschitz_bound {
            return ParamMode::Tightened {
                nu: self.descent_modulus(),
            };
        }
        ParamMode::Invalid(format!(
            "mu2 = {} <= L requires eta > max(L, 2 xi)",
            self.mu2
        ))
    }
}

/// Result of [`SolverParams::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum ParamMode {
    /// `η > 2ξ`, `μ₂ > L`, `μ₃ > 2ξ²/η`.
    Strict { nu: f64 },
    /// `μ₂ <= L` (typically 0) compensated by `η > max{L, 2ξ}`.
    Tightened { nu: f64 },
    Invalid(String),
}

impl ParamMode {
    pub fn name(&self) -> &'static str {
        match self {
            ParamMode::Strict { .. } => "strict",
            ParamMode::Tightened { .. } => "tightened",
            ParamMode::Invalid(_) => "invalid",
        }
    }

    pub fn nu(&self) -> Option<f64> {
        match self {
            ParamMode::Strict { nu } | ParamMode::Tightened { nu } => Some(*nu),
            ParamMode::Invalid(_) => None,
        }
    }

    pub fn is_strict(&self) -> bool {
        matches!(self, ParamMode::Strict { .. })
    }

    pub fn is_valid(&self) -> bool {
        !matches!(self, ParamMode::Invalid(_))
    }
}

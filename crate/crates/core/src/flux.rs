//! Flux functions for the quasilinear diffusion equation `ρ_t = (σ(ρ))_xx`.
//!
//! A [`FluxModel`] bundles a flux `σ` with its analytic derivatives. The
//! derivative `σ'` is the diffusivity: the equation is forward parabolic
//! exactly where `σ' > 0`, and [`FluxModel::parabolicity`] reports the largest
//! symmetric interval on which that holds. Rate-bound computations need the
//! extrema of `σ'` and `|σ''|` over such intervals; those are provided by
//! [`FluxModel::min_slope_on_interval`] and [`FluxModel::max_curvature_on_interval`],
//! in closed form for the built-in models and by sampling plus golden-section
//! refinement for extended models.
//!
//! [`FluxModel::extend`] builds a globally parabolic modification that agrees
//! with a base flux on a chosen interval and flattens to an affine tail, the
//! construction used to restore well-posedness for strongly aggregative and
//! gradient-flux problems.

use thiserror::Error;

pub mod extrema;

use extrema::{max_abs_on_interval, min_on_interval};

/// Smallest admissible plateau slope for extended fluxes.
const PLATEAU_FLOOR: f64 = 1e-3;

/// Errors from flux construction and queries.
#[derive(Debug, Error)]
pub enum FluxError {
    /// Model parameters outside their admissible ranges.
    #[error("invalid flux parameters: {0}")]
    InvalidParams(String),
    /// The requested operation is not defined for extended models.
    #[error("operation is not supported for extended flux models")]
    UnsupportedModel,
    /// No plateau slope kept the blended derivative strictly positive.
    #[error("flux extension failed: blended slope reaches a minimum of {min_slope:e}")]
    Extension { min_slope: f64 },
}

/// Largest symmetric interval `(-radius, radius)` on which the diffusivity
/// `σ'` stays strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Parabolicity {
    /// `σ' > 0` on all of ℝ.
    Global,
    /// `σ' > 0` exactly on `(-radius, radius)`.
    Bounded { radius: f64 },
    /// `σ' ≥ 0` with a double root of `σ'` at `radius`; the problem is
    /// degenerate parabolic and rate bounds refuse it.
    Degenerate { radius: f64 },
}

impl Parabolicity {
    /// Interval radius; `+∞` for globally parabolic fluxes.
    pub fn radius(self) -> f64 {
        match self {
            Parabolicity::Global => f64::INFINITY,
            Parabolicity::Bounded { radius } | Parabolicity::Degenerate { radius } => radius,
        }
    }

    pub fn is_degenerate(self) -> bool {
        matches!(self, Parabolicity::Degenerate { .. })
    }
}

/// A flux function `σ` with analytic first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum FluxModel {
    /// `σ(s) = s`, the linear heat flux.
    Heat,
    /// `σ(s) = (2 k0 / 3ω) s³ − k0 s² + (μ/2) s`, the gregariousness flux
    /// with maximum degree of gregariousness `k0`, critical density `ω` and
    /// motility `μ`.
    Turchin { k0: f64, omega: f64, mu: f64 },
    /// `σ(s) = a s³ − 2a s² + s` with adhesion constant `a ∈ [0, 1]`.
    AnguigeSchmeiser { a: f64 },
    /// `σ(s) = s / (1 + s²)`, the gradient flux of one-dimensional
    /// anisotropic image smoothing.
    PeronaMalik,
    /// A base flux matched exactly on `[-s̄, s̄]` and blended to affine tails
    /// with strictly positive slope everywhere.
    Extended(Box<Extension>),
}

impl FluxModel {
    pub fn heat() -> Self {
        FluxModel::Heat
    }

    pub fn turchin(k0: f64, omega: f64, mu: f64) -> Result<Self, FluxError> {
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(FluxError::InvalidParams(format!(
                "gregariousness k0 must be positive, got {k0}"
            )));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(FluxError::InvalidParams(format!(
                "critical density omega must be positive, got {omega}"
            )));
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(FluxError::InvalidParams(format!(
                "motility mu must lie in (0, 1], got {mu}"
            )));
        }
        Ok(FluxModel::Turchin { k0, omega, mu })
    }

    pub fn anguige_schmeiser(a: f64) -> Result<Self, FluxError> {
        if !(0.0..=1.0).contains(&a) {
            return Err(FluxError::InvalidParams(format!(
                "adhesion constant a must lie in [0, 1], got {a}"
            )));
        }
        Ok(FluxModel::AnguigeSchmeiser { a })
    }

    pub fn perona_malik() -> Self {
        FluxModel::PeronaMalik
    }

    /// `σ(s)`.
    pub fn sigma(&self, s: f64) -> f64 {
        match self {
            FluxModel::Heat => s,
            FluxModel::Turchin { k0, omega, mu } => {
                (2.0 * k0 / (3.0 * omega)) * s * s * s - k0 * s * s + 0.5 * mu * s
            }
            FluxModel::AnguigeSchmeiser { a } => a * s * s * s - 2.0 * a * s * s + s,
            FluxModel::PeronaMalik => s / (1.0 + s * s),
            FluxModel::Extended(ext) => ext.sigma(s),
        }
    }

    /// `σ'(s)`, the diffusivity.
    pub fn sigma_prime(&self, s: f64) -> f64 {
        match self {
            FluxModel::Heat => 1.0,
            FluxModel::Turchin { k0, omega, mu } => {
                (2.0 * k0 / omega) * s * s - 2.0 * k0 * s + 0.5 * mu
            }
            FluxModel::AnguigeSchmeiser { a } => 3.0 * a * s * s - 4.0 * a * s + 1.0,
            FluxModel::PeronaMalik => {
                let q = 1.0 + s * s;
                (1.0 - s * s) / (q * q)
            }
            FluxModel::Extended(ext) => ext.sigma_prime(s),
        }
    }

    /// `σ''(s)`.
    pub fn sigma_double_prime(&self, s: f64) -> f64 {
        match self {
            FluxModel::Heat => 0.0,
            FluxModel::Turchin { k0, omega, .. } => (4.0 * k0 / omega) * s - 2.0 * k0,
            FluxModel::AnguigeSchmeiser { a } => 6.0 * a * s - 4.0 * a,
            FluxModel::PeronaMalik => {
                let q = 1.0 + s * s;
                2.0 * s * (s * s - 3.0) / (q * q * q)
            }
            FluxModel::Extended(ext) => ext.sigma_double_prime(s),
        }
    }

    /// `σ'''(s)`; needed internally to match curvature at extension seams.
    pub(crate) fn sigma_third(&self, s: f64) -> f64 {
        match self {
            FluxModel::Heat => 0.0,
            FluxModel::Turchin { k0, omega, .. } => 4.0 * k0 / omega,
            FluxModel::AnguigeSchmeiser { a } => 6.0 * a,
            FluxModel::PeronaMalik => {
                let s2 = s * s;
                let q = 1.0 + s2;
                -6.0 * (s2 * s2 - 6.0 * s2 + 1.0) / (q * q * q * q)
            }
            FluxModel::Extended(ext) => ext.sigma_third(s),
        }
    }

    /// Whether `σ(-s) = -σ(s)` holds exactly.
    pub fn is_odd(&self) -> bool {
        match self {
            FluxModel::Heat | FluxModel::PeronaMalik => true,
            FluxModel::AnguigeSchmeiser { a } => *a == 0.0,
            FluxModel::Turchin { .. } => false,
            FluxModel::Extended(ext) => ext.odd,
        }
    }

    /// Minimum of `σ'` over `[-radius, radius]` (the bound's `θ`).
    ///
    /// Closed-form critical-point analysis for the built-in models; piecewise
    /// closed form plus sampled refinement for extensions. The raw value is
    /// returned even when it is not positive; rate-bound construction rejects
    /// non-parabolic intervals itself.
    pub fn min_slope_on_interval(&self, radius: f64) -> f64 {
        assert!(
            radius >= 0.0 && radius.is_finite(),
            "interval radius must be finite and >= 0"
        );
        match self {
            FluxModel::Heat => 1.0,
            // Upward parabola with vertex at ω/2 > 0: the minimum sits at the
            // vertex when it is inside the interval, else at the right end.
            FluxModel::Turchin { omega, .. } => self.sigma_prime(radius.min(0.5 * omega)),
            // Vertex at 2/3 with value 1 − 4a/3.
            FluxModel::AnguigeSchmeiser { .. } => self.sigma_prime(radius.min(2.0 / 3.0)),
            // σ' is even and decreases on [0, √3].
            FluxModel::PeronaMalik => self.sigma_prime(radius.min(3.0_f64.sqrt())),
            FluxModel::Extended(ext) => ext.min_slope_on_interval(radius),
        }
    }

    /// Maximum of `|σ''|` over `[-radius, radius]` (the bound's `θ̃`).
    pub fn max_curvature_on_interval(&self, radius: f64) -> f64 {
        assert!(
            radius >= 0.0 && radius.is_finite(),
            "interval radius must be finite and >= 0"
        );
        match self {
            FluxModel::Heat => 0.0,
            // |σ''| is affine in s and largest at the left end.
            FluxModel::Turchin { k0, omega, .. } => (4.0 * k0 / omega) * radius + 2.0 * k0,
            FluxModel::AnguigeSchmeiser { a } => 2.0 * a * (3.0 * radius + 2.0),
            // |σ''| rises to its global maximum 3/4 + 1/√2 at |s| = √2 − 1.
            FluxModel::PeronaMalik => self
                .sigma_double_prime(radius.min(2.0_f64.sqrt() - 1.0))
                .abs(),
            FluxModel::Extended(ext) => ext.max_curvature_on_interval(radius),
        }
    }

    /// Largest `b` such that `σ' > 0` on `(-b, b)`.
    ///
    /// Not defined for extensions, which are globally parabolic by
    /// construction.
    pub fn parabolicity(&self) -> Result<Parabolicity, FluxError> {
        match self {
            FluxModel::Heat => Ok(Parabolicity::Global),
            FluxModel::Turchin { k0, omega, mu } => {
                // σ'(s) = (2k0/ω)s² − 2k0 s + μ/2, discriminant 4k0(k0 − μ/ω).
                let excess = k0 - mu / omega;
                if excess < 0.0 {
                    Ok(Parabolicity::Global)
                } else if excess == 0.0 {
                    Ok(Parabolicity::Degenerate {
                        radius: 0.5 * omega,
                    })
                } else {
                    let root = omega * (k0 - (k0 * excess).sqrt()) / (2.0 * k0);
                    Ok(Parabolicity::Bounded { radius: root })
                }
            }
            FluxModel::AnguigeSchmeiser { a } => {
                if *a < 0.75 {
                    Ok(Parabolicity::Global)
                } else if *a == 0.75 {
                    Ok(Parabolicity::Degenerate { radius: 2.0 / 3.0 })
                } else {
                    let radius = (2.0 * a - (a * (4.0 * a - 3.0)).sqrt()) / (3.0 * a);
                    Ok(Parabolicity::Bounded { radius })
                }
            }
            FluxModel::PeronaMalik => Ok(Parabolicity::Bounded { radius: 1.0 }),
            FluxModel::Extended(_) => Err(FluxError::UnsupportedModel),
        }
    }

    /// Paired lower/upper slope bounds of an extended flux over all of ℝ,
    /// or of a base flux over `[-radius, radius]`.
    pub fn global_slope_bounds(&self) -> Option<(f64, f64)> {
        match self {
            FluxModel::Extended(ext) => Some(ext.slope_bounds()),
            _ => None,
        }
    }

    /// Short lowercase identifier for reports and scenario files.
    pub fn kind_name(&self) -> &'static str {
        match self {
            FluxModel::Heat => "heat",
            FluxModel::Turchin { .. } => "turchin",
            FluxModel::AnguigeSchmeiser { .. } => "anguige_schmeiser",
            FluxModel::PeronaMalik => "perona_malik",
            FluxModel::Extended(_) => "extended",
        }
    }

    /// Builds an [`Extension`] of `self` matched exactly on
    /// `[-match_radius, match_radius]`.
    ///
    /// The derivative of the extension follows a quintic blend in the
    /// derivative from `(σ'(s̄), σ''(s̄), σ'''(s̄))` down to a constant plateau
    /// over `[s̄, s̄ + blend_width]`, and is constant beyond, so the extension
    /// itself is affine there. Odd bases are mirrored oddly; other bases get
    /// an independent blend on each side. The blended slope is kept strictly
    /// positive, escalating the plateau when the default `σ'(s̄)/2` would let
    /// the blend dip through zero.
    pub fn extend(&self, match_radius: f64, blend_width: f64) -> Result<FluxModel, FluxError> {
        if matches!(self, FluxModel::Extended(_)) {
            return Err(FluxError::InvalidParams(
                "extended fluxes cannot be extended again".into(),
            ));
        }
        if !(match_radius > 0.0 && match_radius.is_finite()) {
            return Err(FluxError::InvalidParams(format!(
                "match radius must be positive, got {match_radius}"
            )));
        }
        if !(blend_width > 0.0 && blend_width.is_finite()) {
            return Err(FluxError::InvalidParams(format!(
                "blend width must be positive, got {blend_width}"
            )));
        }
        let radius = self.parabolicity()?.radius();
        if match_radius >= radius {
            return Err(FluxError::InvalidParams(format!(
                "match radius {match_radius} must lie strictly inside the parabolic interval radius {radius}"
            )));
        }
        let seam_min_slope = self.min_slope_on_interval(match_radius);
        if seam_min_slope <= 0.0 {
            return Err(FluxError::InvalidParams(format!(
                "diffusivity is not positive on the match interval (minimum {seam_min_slope:e})"
            )));
        }

        let odd = self.is_odd();
        let right = BlendSide::build(self, match_radius, blend_width, Side::Right)?;
        let left = if odd {
            None
        } else {
            Some(BlendSide::build(
                self,
                match_radius,
                blend_width,
                Side::Left,
            )?)
        };
        Ok(FluxModel::Extended(Box::new(Extension {
            base: Box::new(self.clone()),
            match_radius,
            blend_width,
            odd,
            right,
            left,
        })))
    }
}

/// Midpoint between an interval radius and the parabolicity threshold; the
/// stock choice of match radius when extending a flux for data confined to
/// `[-interval_radius, interval_radius]`.
pub fn midpoint_match_radius(base: &FluxModel, interval_radius: f64) -> Result<f64, FluxError> {
    let radius = base.parabolicity()?.radius();
    if !radius.is_finite() {
        return Err(FluxError::InvalidParams(
            "globally parabolic fluxes need no extension".into(),
        ));
    }
    if !(interval_radius >= 0.0 && interval_radius < radius) {
        return Err(FluxError::InvalidParams(format!(
            "interval radius {interval_radius} must lie inside the parabolic interval radius {radius}"
        )));
    }
    Ok(0.5 * (interval_radius + radius))
}

#[derive(Clone, Copy)]
enum Side {
    Right,
    Left,
}

/// One quintic derivative blend, parameterised by ξ ∈ [0, 1] running outward
/// from the seam.
#[derive(Debug, Clone, PartialEq)]
struct BlendSide {
    /// Coefficients of the blended slope g(ξ) = Σ c_k ξ^k.
    slope_poly: [f64; 6],
    /// Constant slope beyond the blend.
    plateau: f64,
    /// σ at the seam `±s̄`.
    sigma_seam: f64,
    /// σ̃ at the outer end of the blend.
    sigma_end: f64,
    /// Minimum of the blended slope over the blend (diagnostic, > 0).
    min_slope: f64,
    /// Maximum of the blended slope over the blend.
    max_slope: f64,
    /// Maximum of |g'(ξ)|/w over the blend (curvature bound on the blend).
    max_curvature: f64,
}

impl BlendSide {
    fn build(
        base: &FluxModel,
        match_radius: f64,
        width: f64,
        side: Side,
    ) -> Result<Self, FluxError> {
        let seam = match side {
            Side::Right => match_radius,
            Side::Left => -match_radius,
        };
        let f0 = base.sigma_prime(seam);
        // Derivatives of g(ξ) at ξ = 0 in the outward parameterisation.
        let (g1, g2) = match side {
            Side::Right => (
                width * base.sigma_double_prime(seam),
                width * width * base.sigma_third(seam),
            ),
            Side::Left => (
                -width * base.sigma_double_prime(seam),
                width * width * base.sigma_third(seam),
            ),
        };

        let mut plateau = (0.5 * f0).max(PLATEAU_FLOOR);
        let mut best_min = f64::NEG_INFINITY;
        for _ in 0..64 {
            let poly = quintic_blend(f0, g1, g2, plateau);
            let (_, min_slope) = min_on_interval(|xi| eval_poly(&poly, xi), 0.0, 1.0);
            best_min = best_min.max(min_slope);
            if min_slope > 0.0 {
                let (_, neg_max) = min_on_interval(|xi| -eval_poly(&poly, xi), 0.0, 1.0);
                let deriv = poly_derivative(&poly);
                let (_, curv) = max_abs_on_interval(|xi| eval_poly5(&deriv, xi), 0.0, 1.0);
                let integral = poly_integral_at_one(&poly);
                let (sigma_seam, sigma_end) = match side {
                    Side::Right => {
                        let s0 = base.sigma(seam);
                        (s0, s0 + width * integral)
                    }
                    Side::Left => {
                        let s0 = base.sigma(seam);
                        (s0, s0 - width * integral)
                    }
                };
                return Ok(BlendSide {
                    slope_poly: poly,
                    plateau,
                    sigma_seam,
                    sigma_end,
                    min_slope,
                    max_slope: -neg_max,
                    max_curvature: curv / width,
                });
            }
            plateau *= 2.0;
        }
        Err(FluxError::Extension {
            min_slope: best_min,
        })
    }

    /// σ̃' at outward coordinate ξ ∈ [0, 1].
    fn slope(&self, xi: f64) -> f64 {
        eval_poly(&self.slope_poly, xi)
    }

    /// dσ̃'/dξ at ξ; divide by ±width for σ̃''.
    fn slope_xi_derivative(&self, xi: f64) -> f64 {
        eval_poly5(&poly_derivative(&self.slope_poly), xi)
    }

    /// d²σ̃'/dξ² at ξ.
    fn slope_xi_second_derivative(&self, xi: f64) -> f64 {
        let c = &self.slope_poly;
        ((20.0 * c[5] * xi + 12.0 * c[4]) * xi + 6.0 * c[3]) * xi + 2.0 * c[2]
    }

    /// ∫₀^ξ g.
    fn slope_integral(&self, xi: f64) -> f64 {
        let c = &self.slope_poly;
        let mut acc = 0.0;
        for k in (0..6).rev() {
            acc = acc * xi + c[k] / (k as f64 + 1.0);
        }
        acc * xi
    }

    fn min_slope_up_to(&self, xi_hi: f64) -> f64 {
        let (_, v) = min_on_interval(|xi| self.slope(xi), 0.0, xi_hi.min(1.0));
        v
    }

    fn max_curvature_up_to(&self, xi_hi: f64, width: f64) -> f64 {
        let deriv = poly_derivative(&self.slope_poly);
        let (_, v) = max_abs_on_interval(|xi| eval_poly5(&deriv, xi), 0.0, xi_hi.min(1.0));
        v / width
    }
}

/// Quintic g with g(0)=f0, g'(0)=g1, g''(0)=g2, g(1)=plateau, g'(1)=g''(1)=0.
fn quintic_blend(f0: f64, g1: f64, g2: f64, plateau: f64) -> [f64; 6] {
    let c0 = f0;
    let c1 = g1;
    let c2 = 0.5 * g2;
    let d0 = plateau - c0 - c1 - c2;
    let d1 = -(c1 + 2.0 * c2);
    let d2 = -2.0 * c2;
    let c3 = 10.0 * d0 - 4.0 * d1 + 0.5 * d2;
    let c4 = -15.0 * d0 + 7.0 * d1 - d2;
    let c5 = 6.0 * d0 - 3.0 * d1 + 0.5 * d2;
    [c0, c1, c2, c3, c4, c5]
}

fn eval_poly(c: &[f64; 6], x: f64) -> f64 {
    let mut acc = 0.0;
    for k in (0..6).rev() {
        acc = acc * x + c[k];
    }
    acc
}

fn poly_derivative(c: &[f64; 6]) -> [f64; 5] {
    [c[1], 2.0 * c[2], 3.0 * c[3], 4.0 * c[4], 5.0 * c[5]]
}

fn eval_poly5(c: &[f64; 5], x: f64) -> f64 {
    let mut acc = 0.0;
    for k in (0..5).rev() {
        acc = acc * x + c[k];
    }
    acc
}

fn poly_integral_at_one(c: &[f64; 6]) -> f64 {
    (0..6).map(|k| c[k] / (k as f64 + 1.0)).sum()
}

/// A flux agreeing with `base` on `[-s̄, s̄]` with `σ' ∈ [λ, Λ]` for positive
/// constants on all of ℝ.
#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    base: Box<FluxModel>,
    match_radius: f64,
    blend_width: f64,
    odd: bool,
    right: BlendSide,
    left: Option<BlendSide>,
}

impl Extension {
    pub fn base(&self) -> &FluxModel {
        &self.base
    }

    pub fn match_radius(&self) -> f64 {
        self.match_radius
    }

    pub fn blend_width(&self) -> f64 {
        self.blend_width
    }

    fn left_side(&self) -> &BlendSide {
        self.left.as_ref().unwrap_or(&self.right)
    }

    fn sigma(&self, s: f64) -> f64 {
        if self.odd {
            // Evaluate on the positive axis and mirror so σ̃(-s) = -σ̃(s)
            // holds bit-exactly.
            return if s < 0.0 {
                -self.sigma_positive(-s)
            } else {
                self.sigma_positive(s)
            };
        }
        if s.abs() <= self.match_radius {
            return self.base.sigma(s);
        }
        if s > 0.0 {
            self.sigma_positive(s)
        } else {
            let side = self.left_side();
            let xi = (-s - self.match_radius) / self.blend_width;
            if xi <= 1.0 {
                side.sigma_seam - self.blend_width * side.slope_integral(xi)
            } else {
                side.sigma_end + side.plateau * (s + self.match_radius + self.blend_width)
            }
        }
    }

    fn sigma_positive(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        if s <= self.match_radius {
            return self.base.sigma(s);
        }
        let xi = (s - self.match_radius) / self.blend_width;
        if xi <= 1.0 {
            self.right.sigma_seam + self.blend_width * self.right.slope_integral(xi)
        } else {
            self.right.sigma_end + self.right.plateau * (s - self.match_radius - self.blend_width)
        }
    }

    fn sigma_prime(&self, s: f64) -> f64 {
        let (side, xi) = if s >= 0.0 || self.odd {
            let a = s.abs();
            if a <= self.match_radius {
                return self.base.sigma_prime(if self.odd { a } else { s });
            }
            (&self.right, (a - self.match_radius) / self.blend_width)
        } else {
            if -s <= self.match_radius {
                return self.base.sigma_prime(s);
            }
            (
                self.left_side(),
                (-s - self.match_radius) / self.blend_width,
            )
        };
        if xi <= 1.0 {
            side.slope(xi)
        } else {
            side.plateau
        }
    }

    fn sigma_double_prime(&self, s: f64) -> f64 {
        if self.odd && s < 0.0 {
            return -self.sigma_double_prime_oriented(-s, &self.right, 1.0);
        }
        if s >= 0.0 {
            self.sigma_double_prime_oriented(s, &self.right, 1.0)
        } else {
            self.sigma_double_prime_oriented(-s, self.left_side(), -1.0)
        }
    }

    /// σ̃'' at distance `a = |s|` from the origin along one side;
    /// `orientation` is dξ/ds · width.
    fn sigma_double_prime_oriented(&self, a: f64, side: &BlendSide, orientation: f64) -> f64 {
        if a <= self.match_radius {
            return self
                .base
                .sigma_double_prime(if orientation > 0.0 { a } else { -a });
        }
        let xi = (a - self.match_radius) / self.blend_width;
        if xi <= 1.0 {
            orientation * side.slope_xi_derivative(xi) / self.blend_width
        } else {
            0.0
        }
    }

    /// σ̃'''; even under odd mirroring.
    fn sigma_third(&self, s: f64) -> f64 {
        let (side, a, inner_s) = if s >= 0.0 || self.odd {
            (&self.right, s.abs(), if self.odd { s.abs() } else { s })
        } else {
            (self.left_side(), -s, s)
        };
        if a <= self.match_radius {
            return self.base.sigma_third(inner_s);
        }
        let xi = (a - self.match_radius) / self.blend_width;
        if xi <= 1.0 {
            // d²(σ̃')/ds² = g''(ξ)/w² regardless of side orientation.
            side.slope_xi_second_derivative(xi) / (self.blend_width * self.blend_width)
        } else {
            0.0
        }
    }

    fn min_slope_on_interval(&self, radius: f64) -> f64 {
        let mut min = self
            .base
            .min_slope_on_interval(radius.min(self.match_radius));
        if radius > self.match_radius {
            let xi_hi = (radius - self.match_radius) / self.blend_width;
            min = min.min(self.right.min_slope_up_to(xi_hi));
            min = min.min(self.left_side().min_slope_up_to(xi_hi));
            if xi_hi > 1.0 {
                min = min.min(self.right.plateau).min(self.left_side().plateau);
            }
        }
        min
    }

    fn max_curvature_on_interval(&self, radius: f64) -> f64 {
        let mut max = self
            .base
            .max_curvature_on_interval(radius.min(self.match_radius));
        if radius > self.match_radius {
            let xi_hi = (radius - self.match_radius) / self.blend_width;
            max = max.max(self.right.max_curvature_up_to(xi_hi, self.blend_width));
            max = max.max(
                self.left_side()
                    .max_curvature_up_to(xi_hi, self.blend_width),
            );
        }
        max
    }

    /// Global bounds `(λ, Λ)` with `0 < λ ≤ σ̃' ≤ Λ` on ℝ.
    fn slope_bounds(&self) -> (f64, f64) {
        let base_min = self.base.min_slope_on_interval(self.match_radius);
        let (_, neg_base_max) = min_on_interval(
            |s| -self.base.sigma_prime(s),
            -self.match_radius,
            self.match_radius,
        );
        let base_max = -neg_base_max;
        let left = self.left_side();
        let lo = base_min
            .min(self.right.min_slope)
            .min(left.min_slope)
            .min(self.right.plateau)
            .min(left.plateau);
        let hi = base_max
            .max(self.right.max_slope)
            .max(left.max_slope)
            .max(self.right.plateau)
            .max(left.plateau);
        (lo, hi)
    }
}

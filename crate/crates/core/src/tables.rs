//! Versioned constants tables for critical values and approximate p-values.
//!
//! Sources:
//! * Unit-root critical values: MacKinnon (2010), "Critical values for
//!   cointegration tests", Queen's Economics Department WP 1227, table 2,
//!   N = 1. Response surface `b0 + b1/T + b2/T^2 + b3/T^3`.
//! * Unit-root p-values: MacKinnon (1994), "Approximate asymptotic
//!   distribution functions for unit-root and cointegration tests", JBES 12,
//!   N = 1 (same constants as the statsmodels implementation).
//! * Bounds-test critical values: Pesaran, Shin & Smith (2001), JAE 16,
//!   tables CI(iii), CI(v), CII(iii), CII(v); asymptotic, k = 0..=10.
//! * CUSUM boundary constants: Brown, Durbin & Evans (1975), JRSS-B 37.

/// Bumped whenever any constant below changes.
pub const TABLES_VERSION: &str = "2024.1";

/// Significance levels tabulated for the bounds test.
pub const BOUNDS_LEVELS: [f64; 4] = [0.10, 0.05, 0.025, 0.01];

/// Significance levels tabulated for the unit-root test.
pub const UNIT_ROOT_LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

/// MacKinnon (2010) response surfaces, `[level][b0, b1, b2, b3]` for
/// levels 1%, 5%, 10%.
pub const MACKINNON_NC: [[f64; 4]; 3] = [
    [-2.56574, -2.2358, -3.627, 0.0],
    [-1.94100, -0.2686, -3.365, 31.223],
    [-1.61682, 0.2656, -2.714, 25.364],
];
pub const MACKINNON_C: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];
pub const MACKINNON_CT: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];

/// MacKinnon (1994) p-value surface for one deterministic case, N = 1.
#[derive(Debug, Clone, Copy)]
pub struct PValueSurface {
    pub tau_max: f64,
    pub tau_min: f64,
    pub tau_star: f64,
    pub small_p: [f64; 3],
    pub large_p: [f64; 4],
}

pub const MACKINNON_P_NC: PValueSurface = PValueSurface {
    tau_max: 1.51,
    tau_min: -19.04,
    tau_star: -1.04,
    small_p: [0.6344, 1.2378, 0.032496],
    large_p: [0.4797, 0.93557, -0.06999, 0.033066],
};
pub const MACKINNON_P_C: PValueSurface = PValueSurface {
    tau_max: 2.74,
    tau_min: -18.83,
    tau_star: -1.61,
    small_p: [2.1659, 1.4412, 0.038269],
    large_p: [1.7339, 0.93202, -0.12745, -0.010368],
};
pub const MACKINNON_P_CT: PValueSurface = PValueSurface {
    tau_max: 0.70,
    tau_min: -16.18,
    tau_star: -2.89,
    small_p: [3.2512, 1.6047, 0.049588],
    large_p: [2.5261, 0.61654, -0.37956, -0.060285],
};

/// `[k][level][I(0), I(1)]`, levels ordered as [`BOUNDS_LEVELS`].
pub type BoundsTable = [[[f64; 2]; 4]; 11];

/// F bounds, case III (unrestricted intercept, no trend).
pub const PSS_F_CASE3: BoundsTable = [
    [[6.58, 6.58], [8.21, 8.21], [9.80, 9.80], [11.79, 11.79]],
    [[4.04, 4.78], [4.94, 5.73], [5.77, 6.68], [6.84, 7.84]],
    [[3.17, 4.14], [3.79, 4.85], [4.41, 5.52], [5.15, 6.36]],
    [[2.72, 3.77], [3.23, 4.35], [3.69, 4.89], [4.29, 5.61]],
    [[2.45, 3.52], [2.86, 4.01], [3.25, 4.49], [3.74, 5.06]],
    [[2.26, 3.35], [2.62, 3.79], [2.96, 4.18], [3.41, 4.68]],
    [[2.12, 3.23], [2.45, 3.61], [2.75, 3.99], [3.15, 4.43]],
    [[2.03, 3.13], [2.32, 3.50], [2.60, 3.84], [2.96, 4.26]],
    [[1.95, 3.06], [2.22, 3.39], [2.48, 3.70], [2.79, 4.10]],
    [[1.88, 2.99], [2.14, 3.30], [2.37, 3.60], [2.65, 3.97]],
    [[1.83, 2.94], [2.06, 3.24], [2.28, 3.50], [2.54, 3.86]],
];

/// t bounds on the lagged dependent level, case III.
pub const PSS_T_CASE3: BoundsTable = [
    [
        [-2.57, -2.57],
        [-2.86, -2.86],
        [-3.13, -3.13],
        [-3.43, -3.43],
    ],
    [
        [-2.57, -2.91],
        [-2.86, -3.22],
        [-3.13, -3.50],
        [-3.43, -3.82],
    ],
    [
        [-2.57, -3.21],
        [-2.86, -3.53],
        [-3.13, -3.80],
        [-3.43, -4.10],
    ],
    [
        [-2.57, -3.46],
        [-2.86, -3.78],
        [-3.13, -4.05],
        [-3.43, -4.37],
    ],
    [
        [-2.57, -3.66],
        [-2.86, -3.99],
        [-3.13, -4.26],
        [-3.43, -4.60],
    ],
    [
        [-2.57, -3.86],
        [-2.86, -4.19],
        [-3.13, -4.46],
        [-3.43, -4.79],
    ],
    [
        [-2.57, -4.04],
        [-2.86, -4.38],
        [-3.13, -4.66],
        [-3.43, -4.99],
    ],
    [
        [-2.57, -4.23],
        [-2.86, -4.57],
        [-3.13, -4.85],
        [-3.43, -5.19],
    ],
    [
        [-2.57, -4.40],
        [-2.86, -4.72],
        [-3.13, -5.02],
        [-3.43, -5.37],
    ],
    [
        [-2.57, -4.56],
        [-2.86, -4.88],
        [-3.13, -5.18],
        [-3.43, -5.54],
    ],
    [
        [-2.57, -4.69],
        [-2.86, -5.03],
        [-3.13, -5.34],
        [-3.43, -5.68],
    ],
];

/// F bounds, case V (unrestricted intercept and trend).
pub const PSS_F_CASE5: BoundsTable = [
    [[9.81, 9.81], [11.64, 11.64], [13.36, 13.36], [15.73, 15.73]],
    [[5.59, 6.26], [6.56, 7.30], [7.46, 8.27], [8.74, 9.63]],
    [[4.19, 5.06], [4.87, 5.85], [5.49, 6.59], [6.34, 7.52]],
    [[3.47, 4.45], [4.01, 5.07], [4.52, 5.62], [5.17, 6.36]],
    [[3.03, 4.06], [3.47, 4.57], [3.89, 5.07], [4.40, 5.72]],
    [[2.75, 3.79], [3.12, 4.25], [3.47, 4.67], [3.93, 5.23]],
    [[2.53, 3.59], [2.87, 4.00], [3.19, 4.38], [3.60, 4.90]],
    [[2.38, 3.45], [2.69, 3.83], [2.98, 4.16], [3.34, 4.63]],
    [[2.26, 3.34], [2.55, 3.68], [2.82, 4.02], [3.15, 4.43]],
    [[2.16, 3.24], [2.43, 3.56], [2.67, 3.87], [2.97, 4.24]],
    [[2.07, 3.16], [2.33, 3.46], [2.56, 3.76], [2.84, 4.10]],
];

/// t bounds, case V.
pub const PSS_T_CASE5: BoundsTable = [
    [
        [-3.13, -3.13],
        [-3.41, -3.41],
        [-3.65, -3.66],
        [-3.96, -3.97],
    ],
    [
        [-3.13, -3.40],
        [-3.41, -3.69],
        [-3.65, -3.96],
        [-3.96, -4.26],
    ],
    [
        [-3.13, -3.63],
        [-3.41, -3.95],
        [-3.65, -4.20],
        [-3.96, -4.53],
    ],
    [
        [-3.13, -3.84],
        [-3.41, -4.16],
        [-3.65, -4.42],
        [-3.96, -4.73],
    ],
    [
        [-3.13, -4.04],
        [-3.41, -4.36],
        [-3.65, -4.62],
        [-3.96, -4.96],
    ],
    [
        [-3.13, -4.21],
        [-3.41, -4.52],
        [-3.65, -4.79],
        [-3.96, -5.13],
    ],
    [
        [-3.13, -4.37],
        [-3.41, -4.69],
        [-3.66, -4.96],
        [-3.97, -5.31],
    ],
    [
        [-3.13, -4.53],
        [-3.41, -4.85],
        [-3.66, -5.14],
        [-3.97, -5.49],
    ],
    [
        [-3.13, -4.68],
        [-3.40, -5.01],
        [-3.66, -5.30],
        [-3.97, -5.65],
    ],
    [
        [-3.13, -4.82],
        [-3.41, -5.15],
        [-3.65, -5.44],
        [-3.96, -5.79],
    ],
    [
        [-3.13, -4.96],
        [-3.41, -5.29],
        [-3.65, -5.59],
        [-3.96, -5.94],
    ],
];

/// CUSUM boundary constant `a` for significance levels 1%, 5%, 10%.
pub const CUSUM_A: [(f64, f64); 3] = [(0.01, 1.143), (0.05, 0.948), (0.10, 0.850)];

pub fn cusum_constant(level: f64) -> Option<f64> {
    CUSUM_A
        .iter()
        .find(|(l, _)| (l - level).abs() < 1e-12)
        .map(|&(_, a)| a)
}

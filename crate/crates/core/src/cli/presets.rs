//! Parameter grids for the reproducible tables.

/// Survival grid: N = 300, p = 0.4, m = 10 at n = 100, 150, ..., 500.
pub const SURVIVAL: (u64, f64, u64) = (300, 0.4, 10);
pub const SURVIVAL_GRID: [u64; 9] = [100, 150, 200, 250, 300, 350, 400, 450, 500];

/// Moment rows (N, p, m).
pub const MOMENTS: [(u64, f64, u64); 8] = [
    (500, 0.6, 10),
    (500, 0.6, 20),
    (500, 0.6, 30),
    (500, 0.6, 40),
    (500, 0.3, 10),
    (500, 0.3, 20),
    (500, 0.3, 30),
    (500, 0.3, 40),
];

/// Relative-efficiency rows (N, p, m, k).
pub const EFFICIENCY: [(u64, f64, u64, u64); 10] = [
    (500, 0.6, 10, 10),
    (500, 0.6, 10, 20),
    (500, 0.6, 10, 50),
    (500, 0.6, 10, 100),
    (500, 0.6, 10, 1000),
    (500, 0.6, 50, 10),
    (500, 0.6, 50, 20),
    (500, 0.6, 50, 50),
    (500, 0.6, 50, 100),
    (500, 0.6, 50, 1000),
];

/// Two-stage versus sequential comparison: (N, p, m, K₁, γ), 1000 replicas.
pub const COMPARISON: (u64, f64, u64, u64, f64) = (500, 0.6, 10, 100, 0.01);

/// Sequential rows (N, p, m, K₁, γ), 1000 replicas each.
pub const SEQUENTIAL: [(u64, f64, u64, u64, f64); 8] = [
    (500, 0.6, 10, 100, 0.01),
    (500, 0.6, 20, 100, 0.01),
    (500, 0.6, 10, 100, 0.05),
    (500, 0.6, 20, 100, 0.05),
    (100, 0.4, 10, 100, 0.01),
    (100, 0.4, 20, 100, 0.01),
    (100, 0.4, 10, 100, 0.05),
    (100, 0.4, 20, 100, 0.05),
];

pub const PRESET_REPLICAS: u64 = 1000;

//! Shared fixtures for the criterion benchmarks.

use nonlocal_core::{
    DomainMask, DomainShape, FracParams, Grid, GridFunction, Profile, QuadratureSpec,
};

pub fn params_1d() -> FracParams {
    FracParams::new(0.5, 2.0, 1).expect("valid parameters")
}

pub fn quad() -> QuadratureSpec {
    QuadratureSpec::standard()
}

pub fn grid_1d(m: usize) -> Grid {
    Grid::new(1, 2.0, m).expect("valid grid")
}

pub fn ball_mask(m: usize) -> DomainMask {
    DomainMask::from_shape(grid_1d(m), &DomainShape::Ball { radius: 1.0 }).expect("valid mask")
}

pub fn cone_sample(m: usize) -> GridFunction {
    GridFunction::from_profile(
        grid_1d(m),
        &Profile::Cone {
            beta: 0.25,
            center: [0.0; 3],
        },
    )
    .expect("valid profile")
}

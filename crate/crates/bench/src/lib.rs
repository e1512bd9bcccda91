//! Shared fixtures for the criterion benchmarks.

use roughflow_core::flux::FluxLaw;
use roughflow_core::forge::{spectral_field, spectral_scalar, RoughFieldSpec};
use roughflow_core::grid::{GridSpec, ScalarField, VectorField};
use roughflow_core::scheme::SchemeDef;

pub struct Fixture {
    pub grid: GridSpec,
    pub scheme: SchemeDef,
    pub velocity: VectorField,
    pub density: ScalarField,
}

pub fn fixture_1d(n: usize) -> Fixture {
    let grid = GridSpec::new(1, n, 0.1 / n as f64).unwrap();
    let velocity = spectral_field(&RoughFieldSpec::new(1.5, 7, false), &grid).unwrap();
    let velocity = velocity.scale(1.0 / velocity.max_component());
    let base = spectral_scalar(&RoughFieldSpec::new(2.0, 8, false), &grid, "bench-u0");
    let lo = base.min();
    let hi = base.max();
    let density = ScalarField::new(
        grid,
        base.values().iter().map(|v| (v - lo) / (hi - lo)).collect(),
    )
    .unwrap();
    let scheme = SchemeDef::lax_friedrichs(grid, FluxLaw::burgers(1.0), 0.25).unwrap();
    Fixture { grid, scheme, velocity, density }
}

pub fn fixture_2d(n: usize) -> Fixture {
    let grid = GridSpec::new(2, n, 0.1 / n as f64).unwrap();
    let velocity = spectral_field(&RoughFieldSpec::new(2.0, 9, true), &grid).unwrap();
    let velocity = velocity.scale(1.0 / velocity.max_component());
    let base = spectral_scalar(&RoughFieldSpec::new(2.0, 10, false), &grid, "bench-u0");
    let lo = base.min();
    let hi = base.max();
    let density = ScalarField::new(
        grid,
        base.values().iter().map(|v| (v - lo) / (hi - lo)).collect(),
    )
    .unwrap();
    let scheme = SchemeDef::lax_friedrichs(grid, FluxLaw::linear(), 0.125).unwrap();
    Fixture { grid, scheme, velocity, density }
}

//! Fixtures shared by the benchmarks.

use tvroute::field::{GridAxes, GridField, GridFieldBuilder, InterpMethods, Jet, Method1D, SpatialMethod};
use tvroute::{FlowField, GeoGraph, GridSpec, Rect, Vec2};

pub const BOX: Rect = Rect {
    min: Vec2 { x: 0.0, y: -2.4 },
    max: Vec2 { x: 8.0, y: 2.4 },
};

pub const STARTS: [(f64, f64); 5] = [(0.4, -2.0), (0.4, 2.0), (1.6, 0.0), (3.6, -2.0), (3.6, 2.0)];
pub const GOAL: (f64, f64) = (7.6, 0.0);
pub const VMAX: f64 = 1.03;

pub fn jet_graph(sectors: u8) -> GeoGraph {
    GeoGraph::build(
        GridSpec {
            bounds: BOX,
            cell: 0.4,
            sectors,
        },
        &[],
    )
    .expect("graph builds")
}

/// The jet sampled on a 0.1 grid over one period, 33 time levels.
pub fn gridded_jet(spatial: SpatialMethod) -> GridField {
    let jet = Jet::default();
    let period = std::f64::consts::TAU / 0.4;
    let axes = GridAxes {
        nx: 81,
        ny: 49,
        origin: BOX.min,
        dx: 0.1,
        dy: 0.1,
        depths: vec![0.0],
        times: (0..33).map(|i| i as f64 * period / 32.0).collect(),
    };
    GridFieldBuilder::new(axes)
        .methods(InterpMethods {
            spatial,
            depth: Method1D::Linear,
            time: Method1D::Linear,
        })
        .build_from_fn(|x, y, _z, t| {
            let c = jet.sample(Vec2::new(x, y), 0.0, t).expect("jet is defined everywhere");
            (c.u, c.v)
        })
        .expect("grid builds")
}

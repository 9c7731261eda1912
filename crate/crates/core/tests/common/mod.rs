#![allow(dead_code)]

use itd_core::medium::{BoundaryCondition, Dimension, Layer, Obstacle, RadialMedium};

pub fn disk(n: f64) -> RadialMedium {
    RadialMedium::homogeneous(Dimension::Two, 1.0, n).unwrap()
}

pub fn ball(n: f64) -> RadialMedium {
    RadialMedium::homogeneous(Dimension::Three, 1.0, n).unwrap()
}

pub fn two_layer() -> RadialMedium {
    RadialMedium::new(
        Dimension::Two,
        1.0,
        vec![Layer { r: 0.5, n: 4.0 }, Layer { r: 1.0, n: 0.25 }],
        None,
    )
    .unwrap()
}

pub fn obstacle_disk() -> RadialMedium {
    RadialMedium::new(
        Dimension::Two,
        1.0,
        vec![Layer { r: 1.0, n: 4.0 }],
        Some(Obstacle {
            r: 0.3,
            bc: BoundaryCondition::Dirichlet,
        }),
    )
    .unwrap()
}

pub fn standard_media() -> Vec<(&'static str, RadialMedium)> {
    vec![
        ("disk n=4", disk(4.0)),
        ("disk n=0.25", disk(0.25)),
        ("two-layer disk", two_layer()),
        ("ball n=4", ball(4.0)),
        ("disk n=4, obstacle b=0.3", obstacle_disk()),
    ]
}

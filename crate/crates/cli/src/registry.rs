//! Bundled benchmark systems, shipped as ordinary system files.

pub const EXAMPLES: &[(&str, &str, &str)] = &[
    (
        "example1",
        "third-order unstable chain, one input, two measured outputs (Q=diag(1,3,0.1), R=1e-4)",
        include_str!("../data/example1.json"),
    ),
    (
        "example2",
        "aircraft lateral dynamics, two inputs, one measured output (Q=I, R=I)",
        include_str!("../data/example2.json"),
    ),
];

//! Golden SVG files. Run with `ABCF_BLESS=1` to rewrite them.

use abcf::attractor::build_attractor;
use abcf::natext::sample_attractor;
use abcf::Params;
use abcf_cli::{render_svg, Window};
use std::path::PathBuf;

fn golden(name: &str, params: Params, cloud_points: usize) {
    let domain = build_attractor(&params).unwrap();
    let cloud = (cloud_points > 0).then(|| sample_attractor(&params, 300, cloud_points, 1));
    let w = Window::square(3.0).unwrap();
    let first = render_svg(&domain, cloud.as_ref(), w).unwrap();
    let second = render_svg(&domain, cloud.as_ref(), w).unwrap();
    assert_eq!(first, second, "{name}: output is not byte-stable");
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("ABCF_BLESS").is_some() {
        std::fs::write(&path, &first).unwrap();
    }
    let stored = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(stored == first, "{name} differs from the stored golden file");
}

#[test]
fn four_fifths_domain_with_cloud() {
    golden("cloud_m4_5_2_5.svg", Params::ratio(-4, 5, 2, 5), 10_000);
}

#[test]
fn backward_cf_domain() {
    golden("classical_minus1_0.svg", Params::ratio(-1, 1, 0, 1), 0);
}

#[test]
fn symmetric_unit_domain() {
    golden("classical_minus1_1.svg", Params::ratio(-1, 1, 1, 1), 0);
}

#[test]
fn nearest_integer_domain() {
    golden("classical_half.svg", Params::ratio(-1, 2, 1, 2), 0);
}

//! Whole-tier runs across the catalog at moderate sample counts; the
//! acceptance suite repeats the headline combinations at full scale.

use bianchi::curvature::conformal_bundle;
use bianchi::models::{builtin_models, find_model, sample_points};
use bianchi::verify::{run_check, run_tier, Tier};

#[test]
fn tier_a_passes_on_every_catalog_model() {
    for entry in builtin_models() {
        let plan = sample_points(&entry.spec, 10, 13).unwrap();
        let rows = run_tier(Tier::A, &entry.spec, &plan, None).unwrap();
        for row in rows {
            assert!(
                !row.is_applicable() || row.pass,
                "{} on {}: residual {}",
                row.check_id,
                entry.spec.name,
                row.max_residual
            );
        }
    }
}

#[test]
fn tier_b_passes_on_the_nontrivial_products() {
    for name in ["cylinder_r1s3", "product_r2s2"] {
        let spec = find_model(name).unwrap().spec;
        let plan = sample_points(&spec, 10, 17).unwrap();
        let rows = run_tier(Tier::B, &spec, &plan, None).unwrap();
        let applicable = rows.iter().filter(|r| r.is_applicable()).count();
        assert!(applicable >= 30, "{name}: only {applicable} applicable");
        for row in rows {
            assert!(
                !row.is_applicable() || row.pass,
                "{} on {name}: residual {}",
                row.check_id,
                row.max_residual
            );
        }
    }
}

#[test]
fn tier_c_rows_match_catalog_expectations() {
    for name in ["gaussian4", "cylinder_r1s3", "product_r2s2", "sphere4", "warped_test"] {
        let spec = find_model(name).unwrap().spec;
        let plan = sample_points(&spec, 8, 2).unwrap();
        let rows = run_tier(Tier::C, &spec, &plan, None).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert!(row.is_applicable());
        assert!(row.pass, "{name}: verdict {:?}", row.verdict);
        assert_eq!(
            row.verdict.as_deref(),
            spec.expected_class.as_deref(),
            "{name}"
        );
    }
}

#[test]
fn radial_identity_on_cylinder_has_vanishing_sides() {
    // both sides of the radial div^3 identity vanish on the cylinder, and
    // the witness confirms |div Rm|^2 itself is numerically zero
    let spec = find_model("cylinder_r1s3").unwrap().spec;
    let plan = sample_points(&spec, 50, 7).unwrap();
    let row = run_check("B.thm5_1", &spec, &plan, None).unwrap();
    assert!(row.pass);
    assert!(row.max_residual <= 1e-8);
    assert!(
        row.max_witness <= 1e-9,
        "|div Rm|^2 = {} should vanish on the cylinder",
        row.max_witness
    );
}

#[test]
fn conformal_bundle_collects_the_family() {
    let spec = find_model("product_r2s2").unwrap().spec;
    let p = [0.9, 0.2, 1.3, 2.0];
    let bundle = conformal_bundle(&spec, &p).unwrap();
    assert!(bundle.weyl.max_abs() > 0.1);
    assert!(bundle.cotton.max_abs() <= 1e-10);
    assert!(bundle.bach.as_ref().unwrap().max_abs() > 1e-3);
    assert!(bundle.d_tensor.as_ref().unwrap().max_abs() > 1e-3);

    let spec3 = find_model("warped3").unwrap().spec;
    let bundle3 = conformal_bundle(&spec3, &spec3.box_center()).unwrap();
    assert!(bundle3.bach.is_none());
    assert!(bundle3.d_tensor.is_none());
}

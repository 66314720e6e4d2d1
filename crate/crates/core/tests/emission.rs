mod common;

use common::{golden, golden_cases, interpreter_matches, load};
use wfnet_core::promela::{emit_model, emit_property_defines, EmitOptions, Property, Variant};

/// Set `UPDATE_GOLDEN=1` to rewrite the frozen files after a reviewed change.
#[test]
fn emitted_models_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for (file, fixture, opts) in golden_cases() {
        let model = emit_model(&load(fixture), &opts).unwrap();
        let path = golden(file);
        if update {
            std::fs::write(&path, &model.text).unwrap();
        }
        let expected = std::fs::read_to_string(&path).unwrap();
        assert_eq!(model.text, expected, "{file}");
    }
}

#[test]
fn emission_is_deterministic() {
    for (_, fixture, opts) in golden_cases() {
        let w = load(fixture);
        assert_eq!(emit_model(&w, &opts).unwrap(), emit_model(&w, &opts).unwrap());
    }
}

#[test]
fn property_defines_follow_the_sink_index() {
    let seq2 = load("seq2.wfn");
    let all = [Property::Termination, Property::Proper];
    assert_eq!(
        emit_property_defines(&seq2, 1, &all),
        "#define term (PL[2] >= 1)\n#define prop (PL[0]==0 && PL[1]==0 && PL[2]==1)\n"
    );
    assert_eq!(
        emit_property_defines(&seq2, 3, &all),
        "#define kterm (PL[2] >= 3)\n#define kprop (PL[0]==0 && PL[1]==0 && PL[2]==3)\n"
    );
    let res1 = load("res1.wfn");
    let defines = emit_property_defines(&res1, 2, &all);
    assert!(defines.contains("#define kterm (PL[3] >= 2)"), "{defines}");
    assert!(
        defines.contains("#define kprop (PL[0]==0 && PL[1]==0 && PL[2]==1 && PL[3]==2)"),
        "{defines}"
    );
}

#[test]
fn weighted_branch_form() {
    let model = emit_model(
        &load("k2net.wfn"),
        &EmitOptions {
            weighted: true,
            ..EmitOptions::default()
        },
    )
    .unwrap();
    assert!(model
        .text
        .contains(":: atomic { removeW1(0,2) -> fire(0); addW1(1,1) }"));
    assert!(model.text.contains("#define removeW1(p1,n1)"));
}

#[test]
fn closure_includes_star_and_nodead() {
    let model = emit_model(
        &load("seq2.wfn"),
        &EmitOptions {
            variant: Variant::Closure,
            properties: vec![Property::NoDead],
            ..EmitOptions::default()
        },
    )
    .unwrap();
    assert!(model
        .text
        .contains(":: atomic { remove1(2) -> fire(2); add1(0) }"));
    assert!(model
        .text
        .contains("#define live (TR[0]>=1 && TR[1]>=1 && TR[2]>=1)"));
    assert!(model.text.contains("ltl nodead { <> live }"));
    assert_eq!(model.maps.transition_index("t*"), Some(2));
}

#[test]
fn interpreter_reproduces_reachability_graphs() {
    let cases = [
        ("seq2.wfn", 1),
        ("seq2.wfn", 3),
        ("andxor.wfn", 1),
        ("andxor.wfn", 2),
        ("k2net.wfn", 1),
        ("k2net.wfn", 2),
        ("res1.wfn", 1),
        ("res1.wfn", 2),
        ("res1_r0.wfn", 1),
        ("loop.wfn", 1),
    ];
    for (fixture, k) in cases {
        let w = load(fixture);
        for variant in [Variant::Plain, Variant::Closure] {
            if let Err(e) = interpreter_matches(&w, k, variant) {
                panic!("{fixture} k={k} {variant:?}: {e}");
            }
        }
    }
}

//! Scenario serialization round-trips through the parser unchanged.

use proptest::prelude::*;
use rate_lab_cli::{
    parse_scenario, BoundSpec, ExtensionSpec, FluxSpec, InitialDatum, MFloor, ProblemForm,
    Scenario, VerifySpec,
};
use rate_lab_core::{FluxModel, Scheme, SolverConfig};

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    let flux_form_datum = prop_oneof![
        (0.0..0.7f64, 0.05..2.0f64).prop_map(|(a, amp)| {
            (
                FluxModel::anguige_schmeiser(a).unwrap(),
                ProblemForm::DensityDirichlet,
                InitialDatum::Sine {
                    amplitude: amp,
                    mode: 1,
                },
            )
        }),
        // Slope level amp·π/length stays below the threshold 1 for every
        // generated length >= 0.2.
        (0.001..0.06f64, -1.0..1.0f64).prop_map(|(amp, offset)| {
            (
                FluxModel::PeronaMalik,
                ProblemForm::PrimitiveNeumann,
                InitialDatum::Cosine {
                    amplitude: amp,
                    mode: 1,
                    offset,
                },
            )
        }),
        (0.1..3.0f64).prop_map(|height| {
            (
                FluxModel::Heat,
                ProblemForm::PrimitiveNeumann,
                InitialDatum::Bump {
                    center: 0.5,
                    width: 0.25,
                    height,
                },
            )
        }),
    ];
    (
        flux_form_datum,
        8usize..64,
        0.2..2.0f64,
        prop_oneof![
            Just(BoundSpec::Optimize {
                m_floor: MFloor::Auto
            }),
            (0.1..0.9f64, 0.2..3.0f64, 1.1..5.0f64).prop_map(|(tau, lambda, m)| BoundSpec::Fixed {
                tau,
                lambda,
                m
            }),
            (1.0..4.0f64).prop_map(|v| BoundSpec::Optimize {
                m_floor: MFloor::Value(v)
            }),
        ],
        prop_oneof![Just(Scheme::ImplicitEuler), Just(Scheme::CrankNicolson)],
        0.1..2.0f64,
    )
        .prop_map(
            |((base, form, initial), cells, length, bound, scheme, t_final)| Scenario {
                name: "generated".into(),
                flux: FluxSpec {
                    base,
                    extension: ExtensionSpec::None,
                },
                form,
                length,
                cells,
                initial,
                bound,
                solver: SolverConfig {
                    scheme,
                    t_final,
                    output_every: t_final / 20.0,
                    ..SolverConfig::default()
                },
                verify: VerifySpec::default(),
            },
        )
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_identity(scenario in scenario_strategy()) {
        let text = scenario.to_text();
        let reparsed = parse_scenario(&text)
            .map_err(|e| TestCaseError::fail(format!("{e}\n--- text ---\n{text}")))?;
        prop_assert_eq!(&scenario, &reparsed);
        // And a second trip through the canonical form is stable.
        prop_assert_eq!(text, reparsed.to_text());
    }
}

#[test]
fn bundled_scenarios_round_trip() {
    for name in [
        "heat_sine",
        "heat_neumann_gradient",
        "as_weak",
        "as_strong",
        "pm_smooth",
    ] {
        let path = format!("{}/scenarios/{name}.scn", env!("CARGO_MANIFEST_DIR"));
        let text = std::fs::read_to_string(&path).unwrap();
        let scenario = parse_scenario(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(scenario.name, name);
        let reparsed = parse_scenario(&scenario.to_text()).unwrap();
        assert_eq!(scenario, reparsed, "{name} did not round-trip");
    }
}

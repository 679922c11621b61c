use gptest_core::dataset::Dataset;
use gptest_core::dgp::{
    gen_panel_a, gen_panel_b, oracle_nuisances_panel_a, oracle_nuisances_panel_b, panel_a_perturbation, panel_a_score,
    panel_b_perturbation, panel_b_score, PanelAConfig, PanelBConfig, UParam,
};
use gptest_core::scores::{orthogonality_diagnostic, NuisanceBundle, OrthogonalityPath, ScoreForm, ScoreSpec};

const GRID: [f64; 5] = [-0.2, -0.1, 0.0, 0.1, 0.2];

fn paths(
    spec: &ScoreSpec,
    truth: &NuisanceBundle,
    perturbed: &NuisanceBundle,
    data: &Dataset,
) -> (OrthogonalityPath, OrthogonalityPath) {
    let orth = orthogonality_diagnostic(spec, ScoreForm::Orthogonal, truth, perturbed, data, &GRID).unwrap();
    let plug = orthogonality_diagnostic(spec, ScoreForm::PlugIn, truth, perturbed, data, &GRID).unwrap();
    (orth, plug)
}

fn check(orth: &OrthogonalityPath, plug: &OrthogonalityPath, label: &str) {
    for w in 0..orth.weights.len() {
        let ratio = orth.curvature(w, 0.2).unwrap() / orth.curvature(w, 0.1).unwrap();
        let d_orth = orth.derivative_at_zero(w, 0.1).unwrap().abs();
        let d_plug = plug.derivative_at_zero(w, 0.1).unwrap().abs();
        println!("{label} weight {w}: curvature ratio {ratio:.3}, derivative {d_orth:.2e} vs plug-in {d_plug:.2e}");
        assert!((2.5..=6.5).contains(&ratio.abs()), "{label} weight {w}: ratio {ratio}");
        if w == 0 {
            // A constant shift is invisible to the odd weight, so only the
            // unit weight separates the two forms.
            assert!(d_plug >= 10.0 * d_orth, "{label}: {d_orth} vs {d_plug}");
        }
    }
}

#[test]
fn identical_perturbation_gives_flat_path() {
    let data = gen_panel_a(&PanelAConfig {
        n: 2000,
        alpha1: 0.0,
        alpha2: 0.0,
        seed: 1,
    });
    let truth = oracle_nuisances_panel_a(0.0, 0.0, 0);
    let path =
        orthogonality_diagnostic(&panel_a_score(0), ScoreForm::Orthogonal, &truth, &truth, &data, &GRID).unwrap();
    for values in &path.values {
        for v in values {
            assert!((v - values[2]).abs() <= 1e-12 * values[2].abs().max(1.0));
        }
    }
}

#[test]
fn mean_exchangeability_is_orthogonal() {
    let data = gen_panel_a(&PanelAConfig {
        n: 100_000,
        alpha1: 0.0,
        alpha2: 0.0,
        seed: 2,
    });
    let truth = oracle_nuisances_panel_a(0.0, 0.0, 0);
    let (orth, plug) = paths(&panel_a_score(0), &truth, &panel_a_perturbation(0.0, 0.0, 0), &data);
    check(&orth, &plug, "mean exchangeability");
}

#[test]
fn compatibility_is_orthogonal() {
    let data = gen_panel_b(&PanelBConfig {
        n: 100_000,
        beta1: 0.0,
        beta2: 0.0,
        seed: 3,
        u_param: UParam::Variance,
    });
    let truth = oracle_nuisances_panel_b(0.0, 0.0);
    let (orth, plug) = paths(&panel_b_score(), &truth, &panel_b_perturbation(0.0, 0.0), &data);
    check(&orth, &plug, "compatibility");
}

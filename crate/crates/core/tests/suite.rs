use nested_h2::linalg::Tolerances;
use nested_h2::synthesis::optimal_controller;
use nested_h2::sysmodel::fixtures;
use nested_h2::validation::{run_suite, SuiteOptions};

#[test]
fn suite_passes_on_fixtures() {
    let tol = Tolerances::default();
    let opts = SuiteOptions {
        oracle: true,
        ..SuiteOptions::default()
    };
    for (name, p) in [
        ("decoupled", fixtures::decoupled()),
        ("coupled", fixtures::unstable_coupling()),
    ] {
        let s = optimal_controller(&p, &tol).unwrap();
        let r = run_suite(&p, &s, &opts, &tol).unwrap();
        for c in &r.checks {
            println!(
                "{name}: {:<48} {:>10.3e} <= {:.1e} {}",
                c.name, c.value, c.limit, c.pass
            );
        }
        assert!(r.all_pass(), "{name}");
    }
}

//! Regenerates the shipped fixture files.
//!
//! ```text
//! cargo run -p dqs-core --example write_fixtures -- fixtures
//! ```

use std::path::PathBuf;

use dqs::builtin;
use dqs::io::{write_json, ElementFile, GroupDualFile, QuantumSemigroupFile, StateFile, TableFile};
use dqs::mean::{known_mean, solve_mean};
use dqs::{MMElement, SolveOutcome, SolverOptions};

fn main() -> dqs::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;

    for fx in builtin::fixtures() {
        write_json(
            &dir.join(format!("{}.json", fx.name)),
            &QuantumSemigroupFile::from_qs(&fx.qs),
        )?;
        let mean = match known_mean(&fx.qs) {
            Some(m) => m,
            None => match solve_mean(&fx.qs, fx.mean_side, SolverOptions::default())? {
                SolveOutcome::Found(m, _) => m,
                SolveOutcome::Infeasible(r) => panic!("{}: {:?}", fx.name, r),
            },
        };
        write_json(
            &dir.join(format!("{}_mean.json", fx.name)),
            &StateFile::from_state(&mean),
        )?;
    }

    for n in [2, 3, 4] {
        write_json(
            &dir.join(format!("z{n}_table.json")),
            &TableFile::from_table(&builtin::z_n_table(n)),
        )?;
    }
    write_json(
        &dir.join("s3_table.json"),
        &TableFile::from_table(&builtin::s3_table()),
    )?;
    write_json(
        &dir.join("leftzero2_table.json"),
        &TableFile::from_table(&builtin::left_zero_table(2)),
    )?;
    write_json(
        &dir.join("rightzero2_table.json"),
        &TableFile::from_table(&builtin::right_zero_table(2)),
    )?;
    write_json(
        &dir.join("s3_irreps.json"),
        &GroupDualFile::new(&builtin::s3_table(), &builtin::s3_irreps()),
    )?;

    let z2 = builtin::z_n(2);
    let uniform = known_mean(&z2).expect("Z2 is a group");
    write_json(&dir.join("uniform.json"), &StateFile::from_state(&uniform))?;
    let delta1 = MMElement::elem_unit(z2.index(), "1", 0, 0)?;
    write_json(
        &dir.join("delta1.json"),
        &ElementFile::from_element(&delta1),
    )?;
    Ok(())
}

//! Builds a run from JSON, saves and reloads a field snapshot.

use nematic_kit::config::ToolkitConfig;
use nematic_kit::io::{load_snapshot, save_snapshot, write_field_csv};

const CONFIG: &str = r#"{
  "coefficients": { "frank": { "k1": 1.3, "k2": 0.8, "k3": 1.0, "alpha": 0.6 } },
  "grid": { "n": [8, 8, 8] },
  "time": { "t_end": 0.2 },
  "initial": { "director": { "kind": "perturbed", "amplitude": 0.2 } }
}"#;

fn main() -> nematic_kit::error::Result<()> {
    let cfg = ToolkitConfig::from_json_str(CONFIG)?;
    let sim = cfg.simulation()?;
    println!("dt = {:.5}, {} steps, scheme {:?}", sim.dt, sim.steps(), sim.scheme);

    let d = cfg.initial_director(&sim.grid)?;
    let dir = std::env::temp_dir().join("nematic-kit-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("d.nlck");
    save_snapshot(&path, &d)?;
    let back = load_snapshot(&path)?;
    println!("snapshot {} round trip exact: {}", path.display(), back.values() == d.values());

    let mut csv = Vec::new();
    write_field_csv(&mut csv, &back)?;
    let text = String::from_utf8(csv).unwrap();
    for line in text.lines().take(3) {
        println!("{line}");
    }

    // misspelled keys are reported with their path
    match ToolkitConfig::from_json_str(r#"{"grid": {"n": [8, 8, 8], "lenght": [1, 1, 1]}}"#) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}

//! Driving a whole run from a JSON configuration and writing the outputs.
use kg_reduce::app::{emit, run};
use kg_reduce::config::RunConfig;

fn main() -> kg_reduce::Result<()> {
    let cfg = RunConfig::from_json(
        r#"{
          "schema_version": 1,
          "mode": "full",
          "k_phi": 4,
          "k_x": 6,
          "omega": {"list": [[0.3141592653589793], [0.5]]},
          "measure": {"samples": 5000, "l_max": 6},
          "evolution": {"t_final": 10.0, "dt": 0.01}
        }"#,
    )?;
    for w in cfg.validate()? {
        println!("warning: {w}");
    }
    let out = run(&cfg)?;
    for f in &out.report.frequencies {
        println!("omega {:?}: errors {:?}", f.omega, f.errors);
    }
    let dir = std::env::temp_dir().join("kg-reduce-example");
    for p in emit(&out, &dir).map_err(|e| kg_reduce::Error::Io(e.to_string()))? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

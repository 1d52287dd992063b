use epitrace::extgrid::{read_grid, write_grid};
use epitrace::hopflax::{counterexample_pair, CounterexampleVariant};
use std::path::PathBuf;

fn path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn render(f: &epitrace::ExtGridFn) -> Vec<u8> {
    let mut out = Vec::new();
    write_grid(f, &mut out).unwrap();
    out
}

/// Set EPITRACE_REGEN=1 to rewrite the files from the builder.
#[test]
fn counterexample_files_match_builder() {
    let (f, gv) = counterexample_pair(4, CounterexampleVariant::Vertical).unwrap();
    let (_, gh) = counterexample_pair(4, CounterexampleVariant::Horizontal).unwrap();
    for (name, grid) in [("counterexample_f_m4.grid", &f), ("counterexample_g_vertical_m4.grid", &gv), ("counterexample_g_horizontal_m4.grid", &gh)] {
        if std::env::var_os("EPITRACE_REGEN").is_some() {
            std::fs::write(path(name), render(grid)).unwrap();
        }
        let text = std::fs::read(path(name)).unwrap();
        assert_eq!(text, render(grid), "{name} is stale");
        let back = read_grid(std::io::BufReader::new(&text[..])).unwrap();
        assert_eq!(back.grid(), grid.grid());
        assert_eq!(back.values(), grid.values());
    }
}

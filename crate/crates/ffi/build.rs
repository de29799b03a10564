use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("fsde.h");
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("valid cbindgen.toml");
    match cbindgen::Builder::new().with_crate(&crate_dir).with_config(config).generate() {
        Ok(bindings) => {
            // `write_to_file` leaves the file untouched when nothing changed.
            bindings.write_to_file(&header);
        }
        Err(e) => {
            // Keep the checked-in header so downstream builds still work.
            println!("cargo:warning=header not regenerated: {e}");
        }
    }
}

fn main() {
    // LAPACK/BLAS backend for the dense eigensolver and matrix products.
    // The pthread build ships with the distro's libopenblas-dev.
    let candidates = [
        "/usr/lib/x86_64-linux-gnu/openblas-pthread",
        "/usr/lib/x86_64-linux-gnu",
        "/usr/lib",
    ];
    for dir in candidates {
        if std::path::Path::new(dir).join("libopenblas.so").exists()
            || std::path::Path::new(dir).join("libopenblas.so.0").exists()
        {
            println!("cargo:rustc-link-search=native={dir}");
            break;
        }
    }
    println!("cargo:rustc-link-lib=dylib=openblas");
}

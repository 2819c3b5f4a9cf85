fn main() {
    println!("critmet {}", env!("CARGO_PKG_VERSION"));
}

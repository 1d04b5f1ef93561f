fn main() {
    println!("gzl: batch CLI under construction");
}

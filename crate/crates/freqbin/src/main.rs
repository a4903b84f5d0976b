fn main() {
    freqbin::cli::main()
}

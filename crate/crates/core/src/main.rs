fn main() {
    std::process::exit(wavecrest::cli::main_entry());
}

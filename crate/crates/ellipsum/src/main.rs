fn main() {
    std::process::exit(ellipsum::run::main_entry());
}

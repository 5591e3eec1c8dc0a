use std::io::IsTerminal;

fn main() {
    let stdout = std::io::stdout();
    let color = stdout.is_terminal() && std::env::var_os("NO_COLOR").is_none();
    let code = cnlproof_cli::run(std::env::args_os(), &mut std::io::stdin().lock(), &mut stdout.lock(), &mut std::io::stderr(), color);
    std::process::exit(code);
}

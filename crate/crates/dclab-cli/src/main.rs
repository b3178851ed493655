fn main() { println!("dclab"); }

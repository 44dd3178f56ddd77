use limla::format::{parse_machine, serialize_machine};
use limla::model::validate_automaton;
use limla::zoo;

fn golden(name: &str) -> &'static str {
    match name {
        "anbn" => include_str!("../machines/anbn.limla"),
        "even-a" => include_str!("../machines/even-a.limla"),
        "bouncer" => include_str!("../machines/bouncer.limla"),
        "sweeper" => include_str!("../machines/sweeper.limla"),
        _ => unreachable!(),
    }
}

#[test]
fn machine_files_match_builders_byte_for_byte() {
    for name in zoo::NAMES {
        let aut = zoo::by_name(name).unwrap();
        assert_eq!(serialize_machine(&aut), golden(name), "{name}");
    }
}

#[test]
fn machine_files_parse_and_validate() {
    for name in zoo::NAMES {
        let aut = parse_machine(golden(name)).unwrap();
        assert!(validate_automaton(&aut).is_ok(), "{name}");
        assert_eq!(aut, zoo::by_name(name).unwrap());
    }
}

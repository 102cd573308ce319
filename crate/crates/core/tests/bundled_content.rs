use convokernel::content::Content;
use convokernel::topics::default_registry;

#[test]
fn bundled_content_validates() {
    let content = match Content::bundled(&default_registry()) {
        Ok(c) => c,
        Err(errors) => panic!("bundled content invalid:\n{}", errors.join("\n")),
    };
    assert!(content.flows.len() >= 16);
    assert!(content.movies.len() >= 30);
    assert!(content.paa.iter().any(|p| p.question == "Is steak good for health?"));
}

use super::checks;
use super::Rule;
use super::Severity::{Critical, Minor, Moderate, Serious};

/// The 24 statically checkable rules, in evaluation order.
///
/// `label` and `select-name` carry a range of impacts in axe-core; both are
/// fixed at critical here since every hit is an unlabeled form field.
pub fn default_catalog() -> Vec<Rule> {
    vec![
        Rule::new(
            "image-alt",
            Critical,
            "Images have alternative text or a none/presentation role",
            checks::image_alt,
        ),
        Rule::new(
            "area-alt",
            Critical,
            "Image map areas have alternative text",
            checks::area_alt,
        ),
        Rule::new(
            "input-image-alt",
            Critical,
            "Image inputs have alternative text",
            checks::input_image_alt,
        ),
        Rule::new(
            "button-name",
            Critical,
            "Buttons have an accessible name",
            checks::button_name,
        ),
        Rule::new(
            "input-button-name",
            Critical,
            "Input buttons have an accessible name",
            checks::input_button_name,
        ),
        Rule::new("link-name", Serious, "Links have an accessible name", checks::link_name),
        Rule::new("label", Critical, "Form fields have an associated label", checks::label),
        Rule::new(
            "select-name",
            Critical,
            "Select elements have an accessible name",
            checks::select_name,
        ),
        Rule::new(
            "document-title",
            Serious,
            "The document has a non-empty title",
            checks::document_title,
        ),
        Rule::new(
            "html-has-lang",
            Serious,
            "The html element declares a language",
            checks::html_has_lang,
        ),
        Rule::new(
            "html-lang-valid",
            Serious,
            "The html lang attribute is a well-formed language tag",
            checks::html_lang_valid,
        ),
        Rule::new(
            "duplicate-id",
            Minor,
            "Id attribute values are unique",
            checks::duplicate_id,
        ),
        Rule::new(
            "duplicate-id-aria",
            Critical,
            "Ids referenced by ARIA or labels are unique",
            checks::duplicate_id_aria,
        ),
        Rule::new(
            "meta-viewport",
            Critical,
            "The viewport meta tag allows zooming",
            checks::meta_viewport,
        ),
        Rule::new(
            "color-contrast",
            Serious,
            "Text meets the AA contrast minimum",
            checks::color_contrast,
        ),
        Rule::new("region", Moderate, "Page content sits inside landmarks", checks::region),
        Rule::new(
            "landmark-one-main",
            Moderate,
            "The page has a main landmark",
            checks::landmark_one_main,
        ),
        Rule::new(
            "landmark-no-duplicate-main",
            Moderate,
            "The page has at most one main landmark",
            checks::landmark_no_duplicate_main,
        ),
        Rule::new(
            "page-has-heading-one",
            Moderate,
            "The page has a level-one heading",
            checks::page_has_heading_one,
        ),
        Rule::new(
            "heading-order",
            Moderate,
            "Heading levels increase by at most one",
            checks::heading_order,
        ),
        Rule::new(
            "empty-heading",
            Minor,
            "Headings have an accessible name",
            checks::empty_heading,
        ),
        Rule::new("list", Serious, "Lists contain only list items", checks::list),
        Rule::new("listitem", Serious, "List items are inside a list", checks::listitem),
        Rule::new(
            "tabindex",
            Serious,
            "No tabindex is greater than zero",
            checks::tabindex,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Severity;
    use std::collections::HashSet;

    fn severity(id: &str) -> Severity {
        default_catalog().into_iter().find(|r| r.id == id).unwrap().severity
    }

    #[test]
    fn catalog_shape() {
        let cat = default_catalog();
        assert_eq!(cat.len(), 24);
        let ids: HashSet<_> = cat.iter().map(|r| r.id).collect();
        assert_eq!(ids.len(), 24);
    }

    #[test]
    fn severities_match_axe_impacts() {
        let expected = [
            ("image-alt", Critical),
            ("area-alt", Critical),
            ("input-image-alt", Critical),
            ("button-name", Critical),
            ("input-button-name", Critical),
            ("link-name", Serious),
            ("label", Critical),
            ("select-name", Critical),
            ("document-title", Serious),
            ("html-has-lang", Serious),
            ("html-lang-valid", Serious),
            ("duplicate-id", Minor),
            ("duplicate-id-aria", Critical),
            ("meta-viewport", Critical),
            ("color-contrast", Serious),
            ("region", Moderate),
            ("landmark-one-main", Moderate),
            ("landmark-no-duplicate-main", Moderate),
            ("page-has-heading-one", Moderate),
            ("heading-order", Moderate),
            ("empty-heading", Minor),
            ("list", Serious),
            ("listitem", Serious),
            ("tabindex", Serious),
        ];
        for (id, sev) in expected {
            assert_eq!(severity(id), sev, "{id}");
        }
    }
}

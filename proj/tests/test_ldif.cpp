#include <doctest.h>

#include <random>
#include <sstream>

#include "dirplan/bytes.hpp"
#include "dirplan/ldif.hpp"
#include "dirplan/plan.hpp"

using namespace dirplan;
using core::Directory;
using core::Entry;

namespace {

std::unique_ptr<Directory> single_user_directory() {
    auto dir = std::make_unique<Directory>();
    dir->add_suffix(parse_dn("CN=Alice,O=Org,C=DE"));
    Entry e(parse_dn("CN=Alice,O=Org,C=DE"));
    e.add_value("objectClass", "person");
    e.add_value("objectClass", "pkiUser");
    e.add_value("cn", "Alice");
    e.add_value("sn", "Alice");
    dir->load_entry(e);
    return dir;
}

ldif::Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ldif::Error& e) {
        return e.code();
    }
    throw std::logic_error("expected ldif::Error");
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("an empty directory exports as just the version line") {
    Directory dir;
    CHECK(ldif::export_ldif(dir) == "version: 1\n");
}

TEST_CASE("a single entry exports with its dn line first") {
    const std::string out = ldif::export_ldif(*single_user_directory());
    const std::vector<std::string> lines = lines_of(out);
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == "version: 1");
    CHECK(lines[1] == "dn: CN=Alice,O=Org,C=DE");
    CHECK(lines[2] == "objectClass: person");
    CHECK(lines[3] == "objectClass: pkiUser");
}

TEST_CASE("binary attributes render base64 with the ;binary option") {
    auto dir = single_user_directory();
    std::vector<core::Change> changes = {{core::Change::Op::replace_values,
                                          "userCertificate",
                                          {"dummy-certificate-bytes"}}};
    core::AclRule rule;
    rule.principal = "admin";
    rule.permission = core::Permission::modify_attr;
    rule.any_attribute = true;
    rule.subtree = parse_dn("CN=Alice,O=Org,C=DE");
    dir->set_acl({rule});
    dir->modify_entry("admin", parse_dn("CN=Alice,O=Org,C=DE"), changes);

    const std::string out = ldif::export_ldif(*dir);
    // printf 'dummy-certificate-bytes' | base64
    CHECK(out.find("userCertificate;binary:: ZHVtbXktY2VydGlmaWNhdGUtYnl0ZXM=\n") !=
          std::string::npos);
}

TEST_CASE("long base64 values fold at 76 columns and unfold to the same bytes") {
    auto dir = single_user_directory();
    std::string blob;
    std::mt19937 rng(5);
    for (int i = 0; i < 400; ++i) blob += static_cast<char>(rng() % 256);

    core::AclRule rule;
    rule.principal = "admin";
    rule.permission = core::Permission::modify_attr;
    rule.any_attribute = true;
    rule.subtree = parse_dn("CN=Alice,O=Org,C=DE");
    dir->set_acl({rule});
    dir->modify_entry("admin", parse_dn("CN=Alice,O=Org,C=DE"),
                      {{core::Change::Op::replace_values, "userCertificate", {blob}}});

    const std::string out = ldif::export_ldif(*dir);
    for (const std::string& line : lines_of(out)) {
        CHECK(line.size() <= 76);
    }

    const auto restored = ldif::import_ldif(out);
    const std::optional<Entry> e = restored->find_entry(parse_dn("CN=Alice,O=Org,C=DE"));
    REQUIRE(e.has_value());
    REQUIRE(e->values("userCertificate") != nullptr);
    CHECK(e->values("userCertificate")->front() == blob);
}

TEST_CASE("export then import then export is a fixed point") {
    auto dir = std::make_unique<Directory>();
    dir->add_suffix(parse_dn("C=DE"));
    Entry country(parse_dn("C=DE"));
    country.add_value("objectClass", "country");
    country.add_value("c", "DE");
    dir->load_entry(country);
    Entry org(parse_dn("O=Org,C=DE"));
    org.add_value("objectClass", "organization");
    org.add_value("o", "Org");
    org.add_value("description", "hällo wörld");  // forces base64
    dir->load_entry(org);
    for (int i = 0; i < 100; ++i) {
        Entry u(parse_dn("CN=U" + std::to_string(i) + ",O=Org,C=DE"));
        u.add_value("objectClass", "person");
        u.add_value("objectClass", "pkiUser");
        u.add_value("cn", "U" + std::to_string(i));
        u.add_value("sn", "S" + std::to_string(i));
        dir->load_entry(u);
    }

    const std::string first = ldif::export_ldif(*dir);
    const auto reloaded = ldif::import_ldif(first);
    const std::string second = ldif::export_ldif(*reloaded);
    CHECK(first == second);
    CHECK(reloaded->entry_count() == dir->entry_count());

    // value-for-value equality
    const std::vector<Entry> a = dir->all_entries();
    const std::vector<Entry> b = reloaded->all_entries();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("import reports duplicate, orphan, and malformed records by line") {
    const char* missing_dn =
        "version: 1\n"
        "objectClass: person\n";
    try {
        ldif::import_ldif(missing_dn);
        FAIL("expected ldif::Error");
    } catch (const ldif::Error& e) {
        CHECK(e.code() == ldif::Errc::malformed_line);
        CHECK(e.line() == 2);
    }

    const char* orphan =
        "version: 1\n"
        "dn: C=DE\n"
        "objectClass: country\n"
        "c: DE\n"
        "\n"
        "dn: CN=Lost,O=Nowhere,C=DE\n"
        "objectClass: person\n"
        "objectClass: pkiUser\n"
        "cn: Lost\n"
        "sn: Lost\n";
    CHECK(code_of([&] { ldif::import_ldif(orphan); }) == ldif::Errc::orphan_entry);

    const char* duplicate =
        "version: 1\n"
        "dn: C=DE\n"
        "objectClass: country\n"
        "c: DE\n"
        "\n"
        "dn: c=de\n"
        "objectClass: country\n"
        "c: DE\n";
    CHECK(code_of([&] { ldif::import_ldif(duplicate); }) == ldif::Errc::duplicate_entry);

    const char* bad_version = "version: 2\ndn: C=DE\nobjectClass: country\nc: DE\n";
    CHECK(code_of([&] { ldif::import_ldif(bad_version); }) == ldif::Errc::bad_version);

    const char* schema_violation =
        "version: 1\n"
        "dn: C=DE\n"
        "objectClass: country\n";
    try {
        ldif::import_ldif(schema_violation);
        FAIL("expected ldif::Error");
    } catch (const ldif::Error& e) {
        CHECK(e.code() == ldif::Errc::schema_violation);
        CHECK(e.line() == 2);
    }
}

TEST_CASE("import tolerates children listed before parents") {
    const char* text =
        "version: 1\n"
        "dn: CN=Deep,O=Org,C=DE\n"
        "objectClass: person\n"
        "objectClass: pkiUser\n"
        "cn: Deep\n"
        "sn: Deep\n"
        "\n"
        "dn: O=Org,C=DE\n"
        "objectClass: organization\n"
        "o: Org\n"
        "\n"
        "dn: C=DE\n"
        "objectClass: country\n"
        "c: DE\n";
    const auto dir = ldif::import_ldif(text);
    CHECK(dir->entry_count() == 3);
    CHECK(dir->has_entry(parse_dn("CN=Deep,O=Org,C=DE")));
}

TEST_CASE("import accepts comments, CRLF, and a missing version line") {
    const char* text =
        "# backup from the directory\r\n"
        "dn: C=DE\r\n"
        "objectClass: country\r\n"
        "c: DE\r\n";
    const auto dir = ldif::import_ldif(text);
    CHECK(dir->entry_count() == 1);
    CHECK(dir->has_entry(parse_dn("C=DE")));
}

TEST_CASE("is_safe_string follows the SAFE-STRING rule") {
    CHECK(ldif::is_safe_string("Alice"));
    CHECK(ldif::is_safe_string(""));
    CHECK_FALSE(ldif::is_safe_string(" leading space"));
    CHECK_FALSE(ldif::is_safe_string(":colon first"));
    CHECK_FALSE(ldif::is_safe_string("<angle first"));
    // non-ASCII forces base64; any conforming LDIF tool encodes this one
    CHECK_FALSE(ldif::is_safe_string("ümlaut"));
    CHECK_FALSE(ldif::is_safe_string(std::string("nul\0byte", 8)));
    CHECK_FALSE(ldif::is_safe_string("line\nbreak"));
    CHECK(ldif::is_safe_string("trailing colon: fine"));
}

TEST_CASE("every export line stays within 76 characters") {
    auto dir = std::make_unique<Directory>();
    dir->add_suffix(parse_dn("O=Org,C=DE"));
    Entry org(parse_dn("O=Org,C=DE"));
    org.add_value("objectClass", "organization");
    org.add_value("o", "Org");
    org.add_value("description", std::string(300, 'x'));
    dir->load_entry(org);
    for (const std::string& line : lines_of(ldif::export_ldif(*dir))) {
        CHECK(line.size() <= 76);
    }
}

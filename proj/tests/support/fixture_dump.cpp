// Writes the canonical fixture set as DER files, for regenerating the
// golden dumps with an external ASN.1 tool (see golden/regen.sh).
#include <cstdio>
#include <fstream>
#include <string>

#include "fixtures.hpp"

namespace {

void write_file(const std::string& path, const dirplan::Bytes& data) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: fixture_dump <output-dir>\n");
        return 2;
    }
    const std::string dir = argv[1];
    write_file(dir + "/user_cert.der", fixtures::user_cert());
    write_file(dir + "/ca_cert.der", fixtures::ca_cert());
    write_file(dir + "/direct_crl.der", fixtures::direct_crl());
    write_file(dir + "/delta_crl.der", fixtures::delta_crl());
    write_file(dir + "/indirect_crl.der", fixtures::indirect_crl());
    return 0;
}

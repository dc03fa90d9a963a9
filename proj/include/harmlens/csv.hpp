#pragma once

#include <string>
#include <vector>

namespace harmlens::csv {

// RFC 4180 subset: quoted fields, embedded quotes doubled, \r\n or \n rows.
std::vector<std::vector<std::string>> parse(const std::string& content);

std::string escape_field(const std::string& field);
std::string write_row(const std::vector<std::string>& fields);

}  // namespace harmlens::csv

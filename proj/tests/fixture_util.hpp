// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_TESTS_FIXTURE_UTIL_HPP
#define ESSPI_TESTS_FIXTURE_UTIL_HPP

#include <fstream>
#include <string>

#include <json.hpp>

#include <esspi/bytes.hpp>

inline nlohmann::json load_fixture(const std::string& name)
{
    std::ifstream in(std::string(ESSPI_FIXTURE_DIR) + "/" + name);
    if (!in) throw std::runtime_error("missing fixture: " + name);
    nlohmann::json j;
    in >> j;
    return j;
}

inline esspi::Bytes jhex(const nlohmann::json& j) { return esspi::unhex(j.get<std::string>()); }

#endif

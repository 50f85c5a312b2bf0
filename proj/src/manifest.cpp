#include "ridcov/manifest.hpp"

#include "ridcov/errors.hpp"

#include <fstream>

namespace ridcov {

nlohmann::json to_json(const RunManifest& manifest)
{
    nlohmann::json j;
    j["subcommand"] = manifest.subcommand;
    j["config"] = manifest.config;
    j["master_seed"] = manifest.master_seed;
    j["tool_version"] = manifest.tool_version;
    j["outputs"] = manifest.output_paths;
    j["duration_seconds"] = manifest.duration_seconds;
    return j;
}

void write_text_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot write file: " + tmp.string());
        out << content;
        if (!out.flush())
            throw DataError("failed writing file: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw DataError("cannot move " + tmp.string() + " into place: " + ec.message());
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path)
{
    write_text_file_atomic(path, to_json(manifest).dump(2) + "\n");
}

} // namespace ridcov

#include <cstdlib>
#include <map>
#include <set>
#include <sys/wait.h>

#include "periocular/error.hpp"
#include "periocular/pipeline.hpp"

namespace periocular {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

std::string substitute(std::string text, const std::string& placeholder, const std::string& value) {
  for (auto pos = text.find(placeholder); pos != std::string::npos; pos = text.find(placeholder, pos + value.size()))
    text.replace(pos, placeholder.size(), value);
  return text;
}

}  // namespace

Manifest normalize_batch(const Manifest& m, const std::string& command_template,
                         const std::filesystem::path& work_dir) {
  namespace fs = std::filesystem;
  const bool identity = command_template == kIdentityNormalizer;
  if (!identity && (command_template.find("{in_dir}") == std::string::npos ||
                    command_template.find("{out_dir}") == std::string::npos))
    throw InvalidArgument("normalizer command must contain {in_dir} and {out_dir} placeholders");

  const fs::path in_dir = fs::absolute(work_dir / "in");
  const fs::path out_dir = fs::absolute(work_dir / "out");
  fs::remove_all(in_dir);
  fs::remove_all(out_dir);
  fs::create_directories(in_dir);
  fs::create_directories(out_dir);

  // one staged file per distinct source image; left/right records may share one
  std::map<fs::path, std::string> staged;
  std::set<std::string> used_names;
  for (const auto& s : m.samples) {
    if (staged.contains(s.image_path)) continue;
    std::string name = s.image_path.filename().string();
    for (int k = 1; used_names.contains(name); ++k)
      name = std::to_string(k) + "_" + s.image_path.filename().string();
    used_names.insert(name);
    staged.emplace(s.image_path, name);
    fs::copy_file(s.image_path, in_dir / name, fs::copy_options::overwrite_existing);
  }

  if (identity) {
    for (const auto& [src, name] : staged)
      fs::copy_file(in_dir / name, out_dir / name, fs::copy_options::overwrite_existing);
  } else {
    std::string cmd = substitute(command_template, "{in_dir}", shell_quote(in_dir.string()));
    cmd = substitute(cmd, "{out_dir}", shell_quote(out_dir.string()));
    const int status = std::system(cmd.c_str());
    if (status == -1) throw Error("normalizer could not be started: " + cmd);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
      throw Error("normalizer exited with status " +
                  std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : status) + " for batch of " +
                  std::to_string(staged.size()) + " images (" + cmd + ")");
  }

  Manifest out{m.dataset_name, {}, m.attribute_of_interest};
  std::vector<std::string> missing;
  for (const auto& s : m.samples) {
    const fs::path produced = out_dir / staged.at(s.image_path);
    std::error_code ec;
    const auto size = fs::file_size(produced, ec);
    if (ec || size == 0) {
      missing.push_back("'" + s.sample_id + "' (" + produced.filename().string() + (ec ? ", missing)" : ", empty)"));
      continue;
    }
    SampleRecord r = s;
    r.variant = Variant::normalized;
    r.image_path = produced;
    out.samples.push_back(std::move(r));
  }
  if (!missing.empty()) {
    std::string msg = "normalizer output incomplete for sample";
    msg += missing.size() > 1 ? "s " : " ";
    for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
    throw Error(msg);
  }
  return out;
}

}  // namespace periocular

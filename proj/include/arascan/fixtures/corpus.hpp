#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arascan/diag.hpp"
#include "arascan/fixtures/axml_writer.hpp"
#include "arascan/fixtures/dex_writer.hpp"
#include "arascan/fixtures/elf_writer.hpp"
#include "arascan/fixtures/zip_writer.hpp"
#include "arascan/techniques.hpp"

namespace arascan::fixtures {

enum class Variant { POSITIVE, SCATTERED_NEGATIVE, NEAR_MISS_NEGATIVE };

inline std::string to_string(Variant v)
{
    switch (v) {
    case Variant::POSITIVE: return "POSITIVE";
    case Variant::SCATTERED_NEGATIVE: return "SCATTERED_NEGATIVE";
    default: return "NEAR_MISS_NEGATIVE";
    }
}

struct FixtureSpec {
    std::optional<Technique> technique;  // nullopt = pure negative
    Variant variant = Variant::POSITIVE;
};

struct PlantRecord {
    std::string kind;      // invoke | string | field | elf_symbol | ...
    std::string value;
    std::string location;  // method canonical, lib path, manifest path, trace
};

struct Fixture {
    Bytes apk;
    std::optional<std::string> trace_text;
    std::vector<PlantRecord> plants;
    std::vector<Technique> expected;              // normal scan
    std::vector<Technique> expected_global_scope; // under forced GLOBAL scope
};

namespace corpus_detail {

/// Techniques whose seed fingerprint is METHOD-scoped get scatter negatives;
/// the rest get perturbed-literal near misses.
inline bool method_scoped(Technique t)
{
    switch (t) {
    case Technique::UTC:
    case Technique::UTP:
    case Technique::DI:
    case Technique::CB:
    case Technique::SI:
    case Technique::FP:
    case Technique::SU:
    case Technique::PD:
    case Technique::CIH:
    case Technique::SC:
    case Technique::CIC:
    case Technique::CIP:
    case Technique::CSCE:
    case Technique::CBTSP:
    case Technique::DP:
        return true;
    default:
        return false;
    }
}

struct Build {
    DexSpec dex;
    std::vector<DexSpec> extra_dex;
    ManifestSpec manifest;
    std::optional<ElfSpec> so;
    std::string so_path;
    bool signing_block = false;
    std::optional<std::string> trace_text;
    std::vector<PlantRecord> plants;
};

inline std::string lower_name(Technique t) { return to_lower(to_string(t)); }

inline MethodRef mr(std::string cls, std::string name, std::string proto)
{
    return MethodRef{std::move(cls), std::move(name), std::move(proto)};
}

/// One class holding one method with the given body.
inline ClassSpec plant_class(const std::string& descriptor, const std::string& method,
                             std::vector<ins::Any> body,
                             std::vector<std::string> params = {},
                             std::string ret = "V")
{
    ClassSpec cls;
    cls.descriptor = descriptor;
    MethodSpec m;
    m.name = method;
    m.return_desc = std::move(ret);
    m.param_descs = std::move(params);
    m.body = std::move(body);
    cls.methods.push_back(std::move(m));
    return cls;
}

inline void record(Build& b, std::string kind, std::string value, std::string location)
{
    b.plants.push_back(PlantRecord{std::move(kind), std::move(value), std::move(location)});
}

inline void plant_body(Build& b, const std::string& cls_desc, const std::string& method,
                       std::vector<ins::Any> body,
                       std::vector<std::string> params = {}, std::string ret = "V")
{
    std::string loc = cls_desc + "->" + method;
    for (const auto& i : body) {
        if (const auto* cs = std::get_if<ins::ConstString>(&i)) {
            record(b, "string", cs->value, loc);
        } else if (const auto* iv = std::get_if<ins::Invoke>(&i)) {
            record(b, "invoke", iv->callee.canonical(), loc);
        } else if (const auto* sg = std::get_if<ins::SGetObject>(&i)) {
            record(b, "field", sg->field.canonical(), loc);
        }
    }
    b.dex.classes.push_back(
        plant_class(cls_desc, method, std::move(body), std::move(params), std::move(ret)));
}

inline void plant_so(Build& b, ElfSpec spec, const std::string& path)
{
    for (const auto& s : spec.imported_symbols) {
        record(b, "elf_symbol", s, path);
    }
    for (const auto& s : spec.rodata_strings) {
        record(b, "elf_string", s, path);
    }
    if (!spec.text_bytes.empty()) {
        std::string hexed;
        for (uint8_t byte : spec.text_bytes) {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%02X ", byte);
            hexed += buf;
        }
        record(b, "machine_code", hexed, path);
    }
    b.so = std::move(spec);
    b.so_path = path;
}

inline void plant_trace(Build& b, const std::string& api,
                        const std::vector<std::string>& args)
{
    nlohmann::ordered_json line;
    line["seq"] = 1;
    line["thread"] = 1;
    line["api"] = api;
    line["args"] = args;
    line["ret"] = "0";
    b.trace_text = line.dump() + "\n";
    record(b, "trace_call", api, "trace seq 1");
}

inline std::string lib_path_for(ElfArch arch)
{
    switch (arch) {
    case ElfArch::ARM32: return "lib/armeabi-v7a/libfix.so";
    case ElfArch::ARM64: return "lib/arm64-v8a/libfix.so";
    case ElfArch::X86: return "lib/x86/libfix.so";
    default: return "lib/x86_64/libfix.so";
    }
}

// Planted literals mirror the seed rulepack; keep the two in sync.
inline void plant_positive(Build& b, Technique t)
{
    const std::string pkg = "Lcom/fix/" + lower_name(t) + "/";
    switch (t) {
    case Technique::UTC:
        plant_body(b, pkg + "TimingCheck;", "measure",
                   {ins::Invoke{ins::InvokeKind::Static,
                                mr("Landroid/os/SystemClock;", "elapsedRealtime", "()J")},
                    ins::Invoke{ins::InvokeKind::Static,
                                mr("Ljava/lang/System;", "nanoTime", "()J")}});
        break;
    case Technique::US:
        plant_body(b, pkg + "SignalCheck;", "raiseTrap", {ins::ConstString{"SIGTRAP"}});
        break;
    case Technique::UTP:
        plant_body(b, pkg + "TracerCheck;", "checkTracer",
                   {ins::ConstString{"/proc/"}, ins::ConstString{"TracerPid"}});
        break;
    case Technique::PPA: {
        ElfSpec so;
        so.imported_symbols = {"ptrace"};
        plant_so(b, so, lib_path_for(so.arch));
        plant_trace(b, "ptrace", {"0", "0", "0", "0"});
        break;
    }
    case Technique::ADU: {
        ElfSpec so;
        so.imported_symbols = {"inotify_add_watch"};
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::DDF:
        plant_body(b, pkg + "DebuggerCheck;", "checkDebugger",
                   {ins::Invoke{ins::InvokeKind::Static,
                                mr("Landroid/os/Debug;", "isDebuggerConnected", "()Z")}});
        break;
    case Technique::UBS: {
        ElfSpec so;
        so.rodata_strings = {"art::BreakpointSetCount"};
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::ADM: {
        ElfSpec so;
        so.rodata_strings = {"jdwpAdbState::ProcessIncoming"};
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::DI:
        plant_body(b, pkg + "IdCheck;", "checkAndroidId",
                   {ins::Invoke{ins::InvokeKind::Static,
                                mr("Landroid/provider/Settings$Secure;", "getString",
                                   "(Landroid/content/ContentResolver;Ljava/lang/"
                                   "String;)Ljava/lang/String;")},
                    ins::ConstString{"android_id"}});
        break;
    case Technique::CB:
        plant_body(b, pkg + "BuildCheck;", "checkBuild",
                   {ins::SGetObject{FieldRef{"Landroid/os/Build;", "FINGERPRINT",
                                             "Ljava/lang/String;"}},
                    ins::ConstString{"generic"}});
        break;
    case Technique::TM:
        plant_body(b, pkg + "TelephonyCheck;", "checkTelephony",
                   {ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Landroid/telephony/TelephonyManager;", "getDeviceId",
                                   "()Ljava/lang/String;")}});
        break;
    case Technique::HC:
        plant_body(b, pkg + "HardwareCheck;", "checkHardware",
                   {ins::ConstString{"/proc/cpuinfo"}});
        break;
    case Technique::ERS:
        plant_body(b, pkg + "EmulatorCheck;", "checkEmulator",
                   {ins::ConstString{"ro.kernel.qemu"}});
        break;
    case Technique::SI:
        plant_body(b, pkg + "SensorCheck;", "checkSensors",
                   {ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Landroid/hardware/SensorManager;", "getDefaultSensor",
                                   "(I)Landroid/hardware/Sensor;")},
                    ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Landroid/hardware/SensorManager;", "registerListener",
                                   "(Landroid/hardware/SensorEventListener;Landroid/"
                                   "hardware/Sensor;I)Z")}});
        break;
    case Technique::CSBD: {
        ElfSpec so;
        so.imported_symbols = {"pthread_create", "sched_yield"};
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::TBCBD: {
        ElfSpec so;
        so.imported_symbols = {"cacheflush", "mprotect"};
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::MVBD: {
        ElfSpec so;
        so.arch = ElfArch::ARM32;
        so.text_bytes = {0x0f, 0x0a, 0x21, 0xf4};  // vld1.8 {d0,d1}, [r1]
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::UESB: {
        ElfSpec so;
        so.arch = ElfArch::ARM32;
        so.text_bytes = {0x00, 0xf0, 0x22, 0xe1};  // msr cpsr_x, r0
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::FP:
        // transliteration of the private-file-path container check
        plant_body(b, "Lcom/fix/virtualcheck/PathCheck;", "checkByPrivateFilePath",
                   {ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Landroid/content/Context;", "getFilesDir",
                                   "()Ljava/io/File;")},
                    ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Ljava/io/File;", "getPath", "()Ljava/lang/String;")},
                    ins::ConstString{"com.bly.dkplat"},
                    ins::ConstString{"dkplugin.pke.nnp"},
                    ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Ljava/lang/String;", "contains",
                                   "(Ljava/lang/CharSequence;)Z")}},
                   {"Landroid/content/Context;"}, "Z");
        break;
    case Technique::SU:
        plant_body(b, pkg + "UidCheck;", "checkUid",
                   {ins::Invoke{ins::InvokeKind::Static,
                                mr("Landroid/os/Process;", "myUid", "()I")},
                    ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Landroid/app/ActivityManager;",
                                   "getRunningAppProcesses", "()Ljava/util/List;")}});
        break;
    case Technique::PD:
        plant_body(b, pkg + "PortCheck;", "probePort",
                   {ins::Invoke{ins::InvokeKind::Direct,
                                mr("Ljava/net/ServerSocket;", "<init>", "(I)V")},
                    ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Ljava/net/Socket;", "connect",
                                   "(Ljava/net/SocketAddress;)V")}});
        break;
    case Technique::CIH:
        plant_body(b, pkg + "StackCheck;", "checkStack",
                   {ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Ljava/lang/Thread;", "getStackTrace",
                                   "()[Ljava/lang/StackTraceElement;")},
                    ins::ConstString{"callActivityOnCreate"}});
        break;
    case Technique::SC:
        b.signing_block = true;
        record(b, "signing_block", "V2PLUS", "archive");
        break;
    case Technique::CIC:
        plant_body(b, pkg + "IntegrityCheck;", "checkIntegrity",
                   {ins::Invoke{ins::InvokeKind::Static,
                                mr("Ljava/security/MessageDigest;", "getInstance",
                                   "(Ljava/lang/String;)Ljava/security/MessageDigest;")},
                    ins::ConstString{"classes.dex"}});
        break;
    case Technique::SA:
        plant_body(b, pkg + "AttestCheck;", "attest",
                   {ins::ConstString{"com.google.android.gms.safetynet"}});
        break;
    case Technique::IV:
        b.manifest.application_attrs.push_back({"verification", "true"});
        record(b, "manifest_attr", "verification=true", "manifest/application");
        break;
    case Technique::XPOSED:
        plant_body(b, pkg + "HookCheck;", "checkXposed",
                   {ins::ConstString{"XposedBridge.jar"}});
        break;
    case Technique::FRIDA: {
        ElfSpec so;
        so.rodata_strings = {"frida-agent"};
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::CIP:
        plant_body(b, pkg + "RootAppCheck;", "checkRootApps",
                   {ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Landroid/content/pm/PackageManager;",
                                   "getInstalledPackages", "(I)Ljava/util/List;")},
                    ins::ConstString{"com.topjohnwu.magisk"}});
        break;
    case Technique::CSCE:
        plant_body(b, pkg + "ShellCheck;", "execSu",
                   {ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Ljava/lang/Runtime;", "exec",
                                   "(Ljava/lang/String;)Ljava/lang/Process;")},
                    ins::ConstString{"su"}});
        break;
    case Technique::CBTSP:
        plant_body(b, pkg + "TagCheck;", "checkTags",
                   {ins::SGetObject{
                        FieldRef{"Landroid/os/Build;", "TAGS", "Ljava/lang/String;"}},
                    ins::ConstString{"test-keys"}});
        break;
    case Technique::DP:
        plant_body(b, pkg + "PermCheck;", "checkPerms",
                   {ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Ljava/io/File;", "canWrite", "()Z")},
                    ins::ConstString{"/system"}});
        break;
    }
}

/// Same atoms as the positive, each in its own class with no call edges
/// between them; defeats METHOD-scope witnesses by construction.
inline void plant_scattered(Build& b, Technique t)
{
    const std::string pkg = "Lcom/fix/" + lower_name(t) + "/";
    auto scatter = [&](std::vector<std::vector<ins::Any>> pieces) {
        char suffix = 'A';
        for (auto& piece : pieces) {
            plant_body(b, pkg + "Scatter" + std::string(1, suffix++) + ";", "part",
                       std::move(piece));
        }
    };
    switch (t) {
    case Technique::UTC:
        scatter({{ins::Invoke{ins::InvokeKind::Static,
                              mr("Landroid/os/SystemClock;", "elapsedRealtime", "()J")}},
                 {ins::Invoke{ins::InvokeKind::Static,
                              mr("Ljava/lang/System;", "nanoTime", "()J")}}});
        break;
    case Technique::UTP:
        scatter({{ins::ConstString{"/proc/"}}, {ins::ConstString{"TracerPid"}}});
        break;
    case Technique::DI:
        scatter({{ins::Invoke{ins::InvokeKind::Static,
                              mr("Landroid/provider/Settings$Secure;", "getString",
                                 "(Landroid/content/ContentResolver;Ljava/lang/"
                                 "String;)Ljava/lang/String;")}},
                 {ins::ConstString{"android_id"}}});
        break;
    case Technique::CB:
        scatter({{ins::SGetObject{FieldRef{"Landroid/os/Build;", "FINGERPRINT",
                                           "Ljava/lang/String;"}}},
                 {ins::ConstString{"generic"}}});
        break;
    case Technique::SI:
        scatter({{ins::Invoke{ins::InvokeKind::Virtual,
                              mr("Landroid/hardware/SensorManager;", "getDefaultSensor",
                                 "(I)Landroid/hardware/Sensor;")}},
                 {ins::Invoke{ins::InvokeKind::Virtual,
                              mr("Landroid/hardware/SensorManager;", "registerListener",
                                 "(Landroid/hardware/SensorEventListener;Landroid/"
                                 "hardware/Sensor;I)Z")}}});
        break;
    case Technique::FP:
        scatter({{ins::Invoke{ins::InvokeKind::Virtual,
                              mr("Landroid/content/Context;", "getFilesDir",
                                 "()Ljava/io/File;")}},
                 {ins::Invoke{ins::InvokeKind::Virtual,
                              mr("Ljava/io/File;", "getPath", "()Ljava/lang/String;")}},
                 {ins::Invoke{ins::InvokeKind::Virtual,
                              mr("Ljava/lang/String;", "contains",
                                 "(Ljava/lang/CharSequence;)Z")}},
                 {ins::ConstString{"com.bly.dkplat"}}});
        break;
    case Technique::SU:
        scatter({{ins::Invoke{ins::InvokeKind::Static,
                              mr("Landroid/os/Process;", "myUid", "()I")}},
                 {ins::Invoke{ins::InvokeKind::Virtual,
                              mr("Landroid/app/ActivityManager;", "getRunningAppProcesses",
                                 "()Ljava/util/List;")}}});
        break;
    case Technique::PD:
        scatter({{ins::Invoke{ins::InvokeKind::Direct,
                              mr("Ljava/net/ServerSocket;", "<init>", "(I)V")}},
                 {ins::Invoke{ins::InvokeKind::Virtual,
                              mr("Ljava/net/Socket;", "connect",
                                 "(Ljava/net/SocketAddress;)V")}}});
        break;
    case Technique::CIH:
        scatter({{ins::Invoke{ins::InvokeKind::Virtual,
                              mr("Ljava/lang/Thread;", "getStackTrace",
                                 "()[Ljava/lang/StackTraceElement;")}},
                 {ins::ConstString{"callActivityOnCreate"}}});
        break;
    case Technique::SC:
        scatter({{ins::Invoke{ins::InvokeKind::Virtual,
                              mr("Landroid/content/pm/PackageManager;", "getPackageInfo",
                                 "(Ljava/lang/String;I)Landroid/content/pm/PackageInfo;")}},
                 {ins::SGetObject{FieldRef{"Landroid/content/pm/PackageInfo;", "signatures",
                                           "[Landroid/content/pm/Signature;"}}}});
        break;
    case Technique::CIC:
        scatter({{ins::Invoke{ins::InvokeKind::Static,
                              mr("Ljava/security/MessageDigest;", "getInstance",
                                 "(Ljava/lang/String;)Ljava/security/MessageDigest;")}},
                 {ins::ConstString{"classes.dex"}}});
        break;
    case Technique::CIP:
        scatter({{ins::Invoke{ins::InvokeKind::Virtual,
                              mr("Landroid/content/pm/PackageManager;",
                                 "getInstalledPackages", "(I)Ljava/util/List;")}},
                 {ins::ConstString{"com.topjohnwu.magisk"}}});
        break;
    case Technique::CSCE:
        scatter({{ins::Invoke{ins::InvokeKind::Virtual,
                              mr("Ljava/lang/Runtime;", "exec",
                                 "(Ljava/lang/String;)Ljava/lang/Process;")}},
                 {ins::ConstString{"su"}}});
        break;
    case Technique::CBTSP:
        scatter({{ins::SGetObject{
                     FieldRef{"Landroid/os/Build;", "TAGS", "Ljava/lang/String;"}}},
                 {ins::ConstString{"test-keys"}}});
        break;
    case Technique::DP:
        scatter({{ins::Invoke{ins::InvokeKind::Virtual,
                              mr("Ljava/io/File;", "canWrite", "()Z")}},
                 {ins::ConstString{"/system"}}});
        break;
    default:
        throw UnsupportedVariant("no scatter strategy for " + to_string(t));
    }
}

/// Perturbed literals: one character off the real signal, everything else
/// identical to the positive.
inline void plant_near_miss(Build& b, Technique t)
{
    const std::string pkg = "Lcom/fix/" + lower_name(t) + "/";
    switch (t) {
    case Technique::US:
        plant_body(b, pkg + "SignalCheck;", "raiseTrap", {ins::ConstString{"SIGTRAQ"}});
        break;
    case Technique::PPA: {
        ElfSpec so;
        so.imported_symbols = {"ptrace"};
        plant_so(b, so, lib_path_for(so.arch));
        plant_trace(b, "ptrace", {"16", "0", "0", "0"});  // attach, not traceme
        break;
    }
    case Technique::ADU: {
        ElfSpec so;
        so.imported_symbols = {"inotify_add_watchdog"};
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::DDF:
        plant_body(b, pkg + "DebuggerCheck;", "checkDebugger",
                   {ins::Invoke{ins::InvokeKind::Static,
                                mr("Landroid/os/Debug;", "isDebuggerConnectedX", "()Z")}});
        break;
    case Technique::UBS: {
        ElfSpec so;
        so.rodata_strings = {"art::BreakpointSitCount"};
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::ADM: {
        ElfSpec so;
        so.rodata_strings = {"jdwpAdbStatf::ProcessIncoming"};
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::TM:
        plant_body(b, pkg + "TelephonyCheck;", "checkTelephony",
                   {ins::Invoke{ins::InvokeKind::Virtual,
                                mr("Landroid/telephony/TelephonyManager;", "getSimOperator",
                                   "()Ljava/lang/String;")}});
        break;
    case Technique::HC:
        plant_body(b, pkg + "HardwareCheck;", "checkHardware",
                   {ins::ConstString{"/proc/cpuinfa"}});
        break;
    case Technique::ERS:
        plant_body(b, pkg + "EmulatorCheck;", "checkEmulator",
                   {ins::ConstString{"ro.kernel.qemx"}});
        break;
    case Technique::CSBD: {
        ElfSpec so;
        so.imported_symbols = {"pthread_create"};  // missing sched_yield
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::TBCBD: {
        ElfSpec so;
        so.imported_symbols = {"cacheflush"};  // missing mprotect
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::MVBD: {
        ElfSpec so;
        so.arch = ElfArch::ARM32;
        so.text_bytes = {0x0f, 0x0a, 0x21, 0xf5};  // last byte off
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::UESB: {
        ElfSpec so;
        so.arch = ElfArch::ARM32;
        so.text_bytes = {0x00, 0xf0, 0x22, 0xe2};  // last byte off
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    case Technique::SA:
        plant_body(b, pkg + "AttestCheck;", "attest",
                   {ins::ConstString{"com.google.android.gms.safetynef"}});
        break;
    case Technique::IV:
        b.manifest.application_attrs.push_back({"verification", "false"});
        record(b, "manifest_attr", "verification=false", "manifest/application");
        break;
    case Technique::XPOSED:
        plant_body(b, pkg + "HookCheck;", "checkXposed",
                   {ins::ConstString{"XpisedBridge.jar"}});
        break;
    case Technique::FRIDA: {
        ElfSpec so;
        so.rodata_strings = {"frida-agenx"};
        plant_so(b, so, lib_path_for(so.arch));
        break;
    }
    default:
        throw UnsupportedVariant("no near-miss strategy for " + to_string(t));
    }
}

inline Bytes assemble(const Build& b)
{
    ZipWriter zw;
    zw.add("AndroidManifest.xml", build_manifest(b.manifest));
    zw.add("classes.dex", build_dex(b.dex));
    int n = 2;
    for (const auto& extra : b.extra_dex) {
        zw.add("classes" + std::to_string(n++) + ".dex", build_dex(extra));
    }
    if (b.so) {
        zw.add(b.so_path, build_elf(*b.so).bytes);
    }
    if (b.signing_block) {
        zw.add_signing_block_stub();
    }
    return zw.finish();
}

}  // namespace corpus_detail

/// One synthetic APK with exactly the chosen technique's signals (or their
/// scope-violating / perturbed variants).
inline Fixture gen_fixture(const FixtureSpec& spec)
{
    using namespace corpus_detail;
    Build b;
    if (!spec.technique) {
        if (spec.variant == Variant::POSITIVE) {
            throw UnsupportedVariant("a pure negative fixture cannot be POSITIVE");
        }
        b.manifest.package = "com.fix.neutral";
        b.dex.classes.push_back(plant_class("Lcom/fix/neutral/Main;", "run", {}));
    } else {
        Technique t = *spec.technique;
        b.manifest.package = "com.fix." + lower_name(t);
        b.dex.classes.push_back(
            plant_class("Lcom/fix/" + lower_name(t) + "/Main;", "run", {}));
        switch (spec.variant) {
        case Variant::POSITIVE:
            plant_positive(b, t);
            break;
        case Variant::SCATTERED_NEGATIVE:
            if (!method_scoped(t)) {
                throw UnsupportedVariant("no scatter strategy for " + to_string(t));
            }
            plant_scattered(b, t);
            break;
        case Variant::NEAR_MISS_NEGATIVE:
            if (method_scoped(t)) {
                throw UnsupportedVariant("near-miss not defined for " + to_string(t) +
                                         "; use SCATTERED_NEGATIVE");
            }
            plant_near_miss(b, t);
            break;
        }
    }

    Fixture f;
    f.apk = assemble(b);
    f.trace_text = b.trace_text;
    f.plants = std::move(b.plants);
    if (spec.technique && spec.variant == Variant::POSITIVE) {
        f.expected = {*spec.technique};
        f.expected_global_scope = {*spec.technique};
    }
    if (spec.technique && spec.variant == Variant::SCATTERED_NEGATIVE) {
        f.expected_global_scope = {*spec.technique};
    }
    return f;
}

struct CorpusEntry {
    std::string file;
    std::optional<std::string> trace_file;
    FixtureSpec spec;
    Fixture fixture;
};

/// The 64-fixture ground-truth corpus: one positive and one negative per
/// technique. Deterministic bytes; re-runs are identical.
inline std::vector<CorpusEntry> build_corpus()
{
    using namespace corpus_detail;
    std::vector<CorpusEntry> entries;
    for (Technique t : all_techniques) {
        for (Variant v : {Variant::POSITIVE, method_scoped(t)
                                                 ? Variant::SCATTERED_NEGATIVE
                                                 : Variant::NEAR_MISS_NEGATIVE}) {
            CorpusEntry e;
            e.spec = FixtureSpec{t, v};
            std::string suffix = v == Variant::POSITIVE         ? "positive"
                                 : v == Variant::SCATTERED_NEGATIVE ? "scattered"
                                                                    : "nearmiss";
            e.file = lower_name(t) + "_" + suffix + ".apk";
            e.fixture = gen_fixture(e.spec);
            if (e.fixture.trace_text) {
                e.trace_file = e.file + ".trace";
            }
            entries.push_back(std::move(e));
        }
    }
    return entries;
}

inline nlohmann::ordered_json corpus_manifest_json(const std::vector<CorpusEntry>& entries)
{
    nlohmann::ordered_json manifest;
    manifest["corpus_version"] = "1";
    manifest["fixtures"] = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        nlohmann::ordered_json j;
        j["file"] = e.file;
        j["technique"] = e.spec.technique ? nlohmann::ordered_json(to_string(*e.spec.technique))
                                          : nlohmann::ordered_json(nullptr);
        j["variant"] = to_string(e.spec.variant);
        j["trace"] = e.trace_file ? nlohmann::ordered_json(*e.trace_file)
                                  : nlohmann::ordered_json(nullptr);
        nlohmann::ordered_json expected = nlohmann::ordered_json::array();
        for (Technique t : e.fixture.expected) {
            expected.push_back(to_string(t));
        }
        j["expected_techniques"] = std::move(expected);
        std::set<std::string> cats;
        for (Technique t : e.fixture.expected) {
            cats.insert(to_string(category_of(t)));
        }
        j["expected_categories"] = cats;
        nlohmann::ordered_json detected;
        for (Technique t : all_techniques) {
            bool hit = std::find(e.fixture.expected.begin(), e.fixture.expected.end(), t) !=
                       e.fixture.expected.end();
            detected[to_string(t)] = hit;
        }
        j["expected_detected"] = std::move(detected);
        nlohmann::ordered_json global = nlohmann::ordered_json::array();
        for (Technique t : e.fixture.expected_global_scope) {
            global.push_back(to_string(t));
        }
        j["expected_with_global_scope"] = std::move(global);
        nlohmann::ordered_json plants = nlohmann::ordered_json::array();
        for (const auto& p : e.fixture.plants) {
            plants.push_back(
                {{"kind", p.kind}, {"value", p.value}, {"location", p.location}});
        }
        j["plants"] = std::move(plants);
        manifest["fixtures"].push_back(std::move(j));
    }
    return manifest;
}

/// Writes the corpus plus corpus_manifest.json into out_dir.
inline nlohmann::ordered_json gen_corpus(const std::filesystem::path& out_dir)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);

    auto write_file = [&](const fs::path& path, const auto& data) {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + path.string());
        }
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
        if (!out) {
            throw std::runtime_error("write failed: " + path.string());
        }
    };

    auto entries = build_corpus();
    for (const auto& e : entries) {
        write_file(out_dir / e.file, e.fixture.apk);
        if (e.trace_file) {
            write_file(out_dir / *e.trace_file, *e.fixture.trace_text);
        }
    }
    auto manifest = corpus_manifest_json(entries);
    std::string text = manifest.dump(2) + "\n";
    write_file(out_dir / "corpus_manifest.json", text);
    return manifest;
}

}  // namespace arascan::fixtures

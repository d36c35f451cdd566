"""Regenerate data/lexicon.txt from the curated base lists below.

Diseases of up to three words get "acute" and "chronic" expansions;
chemicals are listed as-is. Output is sorted, lowercase, deduplicated.
"""

from pathlib import Path

DISEASES = """
abdominal aortic aneurysm; abscess; achalasia; acne; acromegaly; actinic keratosis; addison disease;
adenocarcinoma; adenomyosis; adrenal insufficiency; agranulocytosis; alcohol withdrawal; alcoholism;
allergic rhinitis; alopecia; alzheimer disease; amaurosis fugax; amyloidosis; amyotrophic lateral sclerosis;
anal fissure; anaphylaxis; anemia; aneurysm; angina; angina pectoris; angioedema; ankylosing spondylitis;
anorexia; anosmia; anxiety; anxiety disorder; aortic dissection; aortic regurgitation; aortic stenosis;
aphasia; aplastic anemia; appendicitis; arrhythmia; arteriosclerosis; arthritis; asbestosis; ascites;
aspergillosis; aspiration pneumonia; asthma; ataxia; atelectasis; atherosclerosis; atrial fibrillation;
atrial flutter; atrial septal defect; atrophic gastritis; attention deficit disorder; autism; autoimmune hepatitis;
back pain; bacteremia; bacterial vaginosis; barrett esophagus; basal cell carcinoma; bells palsy;
benign prostatic hyperplasia; bile duct obstruction; biliary colic; bipolar disorder; bladder cancer;
blastomycosis; blepharitis; bone metastasis; bowel obstruction; bradycardia; brain abscess; brain tumor;
breast cancer; bronchiectasis; bronchiolitis; bronchitis; bronchospasm; brucellosis; bulimia; bullous pemphigoid;
bursitis; cachexia; candidiasis; carcinoid syndrome; carcinoma; cardiac arrest; cardiac tamponade;
cardiomegaly; cardiomyopathy; carotid stenosis; carpal tunnel syndrome; cataract; cellulitis;
cerebral aneurysm; cerebral edema; cerebral palsy; cerebrovascular accident; cervical cancer; chest pain;
chlamydia; cholangiocarcinoma; cholangitis; cholecystitis; choledocholithiasis; cholelithiasis; cholera;
chondrosarcoma; chorea; chronic fatigue syndrome; cirrhosis; claudication; cleft palate; clostridium difficile colitis;
coagulopathy; coarctation of the aorta; coccidioidomycosis; colitis; colon cancer; colorectal cancer; coma;
congestive heart failure; conjunctivitis; constipation; contact dermatitis; copd; cor pulmonale;
coronary artery disease; costochondritis; cough; croup; crohn disease; cryptococcosis; cushing syndrome;
cyanosis; cystic fibrosis; cystitis; cytomegalovirus infection; deep vein thrombosis; dehydration; delirium;
dementia; dengue; depression; dermatitis; dermatomyositis; diabetes; diabetes insipidus; diabetes mellitus;
diabetic ketoacidosis; diabetic nephropathy; diabetic neuropathy; diabetic retinopathy; diarrhea;
diastolic dysfunction; diphtheria; diplopia; disseminated intravascular coagulation; diverticulitis;
diverticulosis; dizziness; duodenal ulcer; dysarthria; dysentery; dyslipidemia; dysmenorrhea; dyspepsia;
dysphagia; dyspnea; dysrhythmia; dystonia; dysuria; eclampsia; ectopic pregnancy; eczema; edema;
emphysema; empyema; encephalitis; encephalopathy; endocarditis; endometrial cancer; endometriosis;
enteritis; enuresis; epidural hematoma; epilepsy; epistaxis; erectile dysfunction; erysipelas;
erythema multiforme; esophageal cancer; esophageal varices; esophagitis; essential tremor; failure to thrive;
fatty liver; febrile neutropenia; fever; fibroadenoma; fibromyalgia; fistula; folliculitis; food allergy;
fracture; frostbite; gallstones; ganglion cyst; gangrene; gastric cancer; gastric ulcer; gastritis;
gastroenteritis; gastroesophageal reflux disease; gastroparesis; giant cell arteritis; giardiasis; gingivitis;
glaucoma; glioblastoma; glomerulonephritis; goiter; gonorrhea; gout; graves disease; guillain barre syndrome;
hay fever; head injury; headache; hearing loss; heart block; heart disease; heart failure; heart murmur;
heat stroke; hematemesis; hematochezia; hematoma; hematuria; hemochromatosis; hemolytic anemia; hemophilia;
hemoptysis; hemorrhage; hemorrhoids; hemothorax; hepatic encephalopathy; hepatitis; hepatitis a;
hepatitis b; hepatitis c; hepatocellular carcinoma; hepatomegaly; hepatorenal syndrome; hernia;
herniated disc; herpes simplex; herpes zoster; hiatal hernia; hidradenitis suppurativa; histoplasmosis;
hives; hodgkin lymphoma; hoarseness; huntington disease; hydrocephalus; hydronephrosis; hypercalcemia;
hypercholesterolemia; hyperglycemia; hyperkalemia; hyperlipidemia; hypernatremia; hyperparathyroidism;
hypertension; hypertensive crisis; hyperthyroidism; hypertriglyceridemia; hypertrophic cardiomyopathy;
hyperuricemia; hypoalbuminemia; hypocalcemia; hypoglycemia; hypokalemia; hypomagnesemia; hyponatremia;
hypoparathyroidism; hypotension; hypothermia; hypothyroidism; hypoxemia; hypoxia; ileus; impetigo;
incontinence; infectious mononucleosis; infertility; influenza; inguinal hernia; insomnia;
interstitial lung disease; intracerebral hemorrhage; iron deficiency anemia; irritable bowel syndrome;
ischemia; ischemic colitis; ischemic stroke; jaundice; kaposi sarcoma; keloid; keratitis; kidney disease;
kidney failure; kidney stone; kyphosis; labyrinthitis; lactose intolerance; laryngitis; lead poisoning;
left ventricular hypertrophy; legionnaires disease; leiomyoma; leprosy; leptospirosis; leukemia; leukocytosis;
leukopenia; lichen planus; lipoma; listeriosis; liver cancer; liver disease; liver failure; lower back pain;
lung cancer; lung nodule; lupus; lyme disease; lymphadenopathy; lymphedema; lymphoma; macular degeneration;
malabsorption; malaria; malignant hypertension; malignant melanoma; malnutrition; mastitis; measles;
melanoma; melena; memory loss; meniere disease; meningioma; meningitis; menorrhagia; mesothelioma;
metabolic acidosis; metabolic alkalosis; metabolic syndrome; metastatic disease; migraine; mitral regurgitation;
mitral stenosis; mitral valve prolapse; multiple myeloma; multiple sclerosis; mumps; muscular dystrophy;
myalgia; myasthenia gravis; mycosis fungoides; myelodysplastic syndrome; myelofibrosis; myocardial infarction;
myocarditis; myopathy; myositis; narcolepsy; nausea; necrotizing fasciitis; nephritis; nephrolithiasis;
nephropathy; nephrotic syndrome; neuralgia; neuroblastoma; neurofibromatosis; neuropathy; neutropenia;
nocturia; non hodgkin lymphoma; obesity; obstructive sleep apnea; onychomycosis; optic neuritis; orchitis;
osteoarthritis; osteomalacia; osteomyelitis; osteopenia; osteoporosis; osteosarcoma; otitis externa;
otitis media; ovarian cancer; ovarian cyst; paget disease; palpitations; pancreatic cancer; pancreatitis;
pancytopenia; panic disorder; papilledema; paralysis; paraplegia; parkinson disease; paronychia;
patent ductus arteriosus; pelvic inflammatory disease; pemphigus; peptic ulcer; peptic ulcer disease;
pericardial effusion; pericarditis; peripheral arterial disease; peripheral neuropathy; peripheral vascular disease;
peritonitis; pernicious anemia; pertussis; pharyngitis; pheochromocytoma; phlebitis; pilonidal cyst;
pituitary adenoma; plague; pleural effusion; pleurisy; pneumococcal pneumonia; pneumoconiosis; pneumonia;
pneumonitis; pneumothorax; poliomyelitis; polycystic kidney disease; polycystic ovary syndrome;
polycythemia; polycythemia vera; polymyalgia rheumatica; polymyositis; polyneuropathy; polyp; polyuria;
portal hypertension; post traumatic stress disorder; postherpetic neuralgia; preeclampsia; pressure ulcer;
prostate cancer; prostatitis; proteinuria; pruritus; psoriasis; psoriatic arthritis; psychosis;
pulmonary edema; pulmonary embolism; pulmonary fibrosis; pulmonary hypertension; pulmonary nodule;
pyelonephritis; pyloric stenosis; rabies; radiculopathy; raynaud phenomenon; reactive arthritis;
rectal cancer; reflux esophagitis; renal artery stenosis; renal cell carcinoma; renal failure;
renal insufficiency; respiratory distress; respiratory failure; restless legs syndrome; retinal detachment;
retinopathy; rhabdomyolysis; rheumatic fever; rheumatic heart disease; rheumatoid arthritis; rhinitis;
rickets; rosacea; rotator cuff tear; rubella; salmonellosis; sarcoidosis; sarcoma; scabies; scarlet fever;
schizophrenia; sciatica; scleroderma; scoliosis; seizure; sepsis; septic shock; shigellosis; shingles;
shock; sick sinus syndrome; sickle cell anemia; sickle cell disease; silicosis; sinusitis; sjogren syndrome;
skin cancer; sleep apnea; small bowel obstruction; smallpox; spinal stenosis; splenomegaly; spondylosis;
squamous cell carcinoma; status epilepticus; steatohepatitis; stomatitis; strep throat; stroke;
subarachnoid hemorrhage; subdural hematoma; supraventricular tachycardia; syncope; syphilis;
systemic lupus erythematosus; tachycardia; tendinitis; testicular cancer; tetanus; thalassemia;
thrombocytopenia; thrombocytosis; thrombophlebitis; thrombosis; thrush; thyroid cancer; thyroid nodule;
thyroiditis; tinnitus; tonsillitis; toxoplasmosis; transient ischemic attack; tremor; trigeminal neuralgia;
tuberculosis; typhoid fever; ulcer; ulcerative colitis; upper respiratory infection; uremia; urethritis;
urinary incontinence; urinary retention; urinary tract infection; urticaria; uterine fibroids; uveitis;
valvular heart disease; varicella; varicose veins; vascular dementia; vasculitis; ventricular fibrillation;
ventricular septal defect; ventricular tachycardia; vertigo; vitamin b12 deficiency; vitamin d deficiency;
vitiligo; vomiting; von willebrand disease; weight loss; wheezing; whooping cough; wilson disease;
wolff parkinson white syndrome; yellow fever; zika virus infection; chronic obstructive pulmonary disease;
acute kidney injury; acute respiratory distress syndrome; end stage renal disease; chronic kidney disease;
nicotine dependence; tobacco use disorder; substance abuse; alcohol abuse; opioid dependence; drug overdose
"""

CHEMICALS = """
acetaminophen; acetazolamide; acetylcysteine; acyclovir; adenosine; albuterol; alendronate; allopurinol;
alprazolam; amantadine; amikacin; amiloride; aminophylline; amiodarone; amitriptyline; amlodipine;
amoxicillin; amphetamine; amphotericin b; ampicillin; anastrozole; apixaban; aripiprazole; arsenic;
asbestos; aspirin; atenolol; atorvastatin; atropine; azathioprine; azithromycin; aztreonam; baclofen;
beclomethasone; benazepril; benzene; benzodiazepine; benztropine; betamethasone; bicalutamide; bisoprolol;
bleomycin; bortezomib; budesonide; bumetanide; buprenorphine; bupropion; buspirone; busulfan; caffeine;
calcitonin; calcitriol; calcium carbonate; calcium gluconate; candesartan; capecitabine; captopril;
carbamazepine; carbidopa; carbon monoxide; carboplatin; carvedilol; cefazolin; cefepime; cefotaxime;
ceftazidime; ceftriaxone; cefuroxime; celecoxib; cephalexin; cetirizine; chlorambucil; chlorhexidine;
chloroquine; chlorpromazine; chlorthalidone; cholestyramine; cimetidine; ciprofloxacin; cisplatin;
citalopram; clarithromycin; clindamycin; clobetasol; clonazepam; clonidine; clopidogrel; clotrimazole;
clozapine; cocaine; codeine; colchicine; cortisol; cyclobenzaprine; cyclophosphamide; cyclosporine;
cytarabine; dabigatran; dantrolene; dapsone; daptomycin; desmopressin; dexamethasone; dextromethorphan;
diazepam; diclofenac; dicyclomine; digoxin; diltiazem; diphenhydramine; dipyridamole; dobutamine;
docetaxel; docusate; donepezil; dopamine; doxazosin; doxorubicin; doxycycline; duloxetine; enalapril;
enoxaparin; entecavir; epinephrine; eplerenone; erythromycin; erythropoietin; escitalopram; esomeprazole;
estradiol; ethambutol; ethanol; ethinyl estradiol; etomidate; famotidine; fentanyl; ferrous sulfate;
fexofenadine; filgrastim; finasteride; fluconazole; fludrocortisone; flumazenil; fluorouracil; fluoxetine;
fluphenazine; fluticasone; fluvoxamine; folic acid; fondaparinux; formaldehyde; fosphenytoin; furosemide;
gabapentin; ganciclovir; gemcitabine; gemfibrozil; gentamicin; glargine; glipizide; glucagon; glyburide;
glycopyrrolate; haloperidol; heparin; heroin; hydralazine; hydrochlorothiazide; hydrocodone; hydrocortisone;
hydromorphone; hydroxychloroquine; hydroxyurea; hydroxyzine; ibuprofen; imatinib; imipenem; indomethacin;
infliximab; insulin; insulin glargine; ipratropium; irbesartan; isoniazid; isosorbide mononitrate;
isotretinoin; ivermectin; ketamine; ketoconazole; ketorolac; labetalol; lactulose; lamivudine; lamotrigine;
lansoprazole; letrozole; leucovorin; levetiracetam; levofloxacin; levothyroxine; lidocaine; linezolid;
liraglutide; lisinopril; lithium; loperamide; loratadine; lorazepam; losartan; lovastatin; magnesium sulfate;
mannitol; meclizine; medroxyprogesterone; meloxicam; memantine; meperidine; mercaptopurine; mercury;
meropenem; mesalamine; metformin; methadone; methamphetamine; methimazole; methocarbamol; methotrexate;
methylphenidate; methylprednisolone; metoclopramide; metolazone; metoprolol; metronidazole; micafungin;
midazolam; mirtazapine; misoprostol; montelukast; morphine; moxifloxacin; mupirocin; mycophenolate;
nabumetone; nadolol; naloxone; naltrexone; naproxen; nebivolol; neomycin; nicardipine; nicotine;
nicotine patch; nifedipine; nitrofurantoin; nitroglycerin; nitroprusside; nitrous oxide; norepinephrine;
nortriptyline; nystatin; octreotide; olanzapine; omeprazole; ondansetron; oseltamivir; oxacillin;
oxaliplatin; oxybutynin; oxycodone; oxygen; oxytocin; paclitaxel; pantoprazole; paroxetine; penicillin;
pentamidine; phenobarbital; phenylephrine; phenytoin; pioglitazone; piperacillin; potassium chloride;
pramipexole; pravastatin; prazosin; prednisolone; prednisone; pregabalin; primidone; probenecid;
prochlorperazine; promethazine; propofol; propranolol; propylthiouracil; pseudoephedrine; pyrazinamide;
pyridostigmine; quetiapine; quinapril; quinine; rabeprazole; raloxifene; ramipril; ranitidine; rifampin;
risperidone; rituximab; rivaroxaban; rocuronium; ropinirole; rosuvastatin; salmeterol; scopolamine;
senna; sertraline; sevelamer; sildenafil; simvastatin; sitagliptin; sodium bicarbonate; sodium chloride;
sotalol; spironolactone; streptomycin; succinylcholine; sucralfate; sulfasalazine; sumatriptan; tacrolimus;
tamoxifen; tamsulosin; temazepam; tenofovir; terazosin; terbinafine; testosterone; tetracycline;
theophylline; thiamine; ticagrelor; timolol; tiotropium; tizanidine; tobacco; tobramycin; topiramate;
torsemide; tramadol; trazodone; triamcinolone; trimethoprim; valacyclovir; valproic acid; valsartan;
vancomycin; vasopressin; vecuronium; venlafaxine; verapamil; vinblastine; vincristine; vitamin b12;
vitamin d; vitamin k; voriconazole; warfarin; zidovudine; ziprasidone; zoledronic acid; zolpidem;
cigarette smoke; tar; carbon dioxide; lead; cadmium; marijuana; cannabis; alcohol; nicotine gum;
varenicline; bupropion sr; glucose; potassium; sodium; calcium; magnesium; phosphate; creatinine;
bilirubin; cholesterol; triglycerides; hemoglobin; albumin; troponin; lactate; ammonia; urea; uric acid;
iron; ferritin; cortisone; histamine; serotonin; acetylcholine; methanol; ethylene glycol; cyanide;
chlorine; ozone; radon; silica
"""

MODIFIERS = ["acute", "chronic"]

def split(block):
    return [t.strip() for t in block.replace("\n", " ").split(";") if t.strip()]

def main():
    diseases = split(DISEASES)
    chemicals = split(CHEMICALS)
    terms = set(diseases) | set(chemicals)
    for d in diseases:
        if len(d.split()) > 3:
            continue
        for m in MODIFIERS:
            if not d.startswith(m.split()[0] + " "):
                terms.add(f"{m} {d}")
    out = Path(__file__).with_name("lexicon.txt")
    header = [
        "# Disease and chemical gazetteer: one lowercase term per line.",
        "# Generated by build_lexicon.py from curated base lists and modifier expansions.",
    ]
    out.write_text("\n".join(header + sorted(terms)) + "\n", encoding="utf-8")
    print(f"{len(diseases)} diseases, {len(chemicals)} chemicals, {len(terms)} terms")

if __name__ == "__main__":
    main()
